/*
 * Copyright (c) 2026 The evosched Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

/// @file evosched.hpp
/// @brief Umbrella header.

#include "evosched/core.hpp"
#include "evosched/cost_model.hpp"
#include "evosched/drift.hpp"
#include "evosched/io.hpp"
#include "evosched/json_lines.hpp"
#include "evosched/profiler.hpp"
#include "evosched/regressor.hpp"
#include "evosched/rng.hpp"
#include "evosched/sampler.hpp"
#include "evosched/scenario.hpp"
#include "evosched/scheduler.hpp"
#include "evosched/simulator.hpp"
#include "evosched/trace.hpp"
