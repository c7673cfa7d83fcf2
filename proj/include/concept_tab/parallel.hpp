// Copyright 2026 The concept_tab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace concept_tab {

// Worker cap for internal parallel loops. Defaults to the value of
// CONCEPT_TAB_THREADS when set, else std::thread::hardware_concurrency().
std::size_t max_threads();
void set_max_threads(std::size_t n);

// Runs body(i) for i in [0, n) on up to max_threads() workers. Each index is
// visited exactly once; callers write results into per-index slots so the
// output does not depend on scheduling. The first exception thrown by any
// body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace concept_tab
