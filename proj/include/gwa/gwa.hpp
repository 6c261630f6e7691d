// Copyright 2026 The gwa Authors
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

#ifndef GWA_GWA_HPP
#define GWA_GWA_HPP

#include "gwa/attention.hpp"
#include "gwa/grouping.hpp"
#include "gwa/mask.hpp"
#include "gwa/matrix.hpp"
#include "gwa/rng.hpp"
#include "gwa/simulation.hpp"
#include "gwa/version.hpp"
#include "gwa/window.hpp"

#endif  // GWA_GWA_HPP
