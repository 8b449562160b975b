// Copyright 2026 The Shuffle Bandits Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHUFFLE_BANDITS_FORMAT_H_
#define SHUFFLE_BANDITS_FORMAT_H_

#include <string>

namespace shuffle_bandits {

// Shortest decimal that round-trips to the same double. Locale independent.
std::string FormatDouble(double value);

}  // namespace shuffle_bandits

#endif  // SHUFFLE_BANDITS_FORMAT_H_
