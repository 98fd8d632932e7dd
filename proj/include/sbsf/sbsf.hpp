// Copyright 2026 The sbsf Authors
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


// Everything at once.
#pragma once

#include "sbsf/cem.hpp"
#include "sbsf/config.hpp"
#include "sbsf/errors.hpp"
#include "sbsf/experiments.hpp"
#include "sbsf/filter.hpp"
#include "sbsf/geometry.hpp"
#include "sbsf/intersection.hpp"
#include "sbsf/io.hpp"
#include "sbsf/parallel.hpp"
#include "sbsf/problem.hpp"
#include "sbsf/rng.hpp"
#include "sbsf/run.hpp"
#include "sbsf/safety.hpp"
#include "sbsf/scenario.hpp"
#include "sbsf/sequence.hpp"
#include "sbsf/svgd.hpp"
#include "sbsf/unicycle.hpp"
