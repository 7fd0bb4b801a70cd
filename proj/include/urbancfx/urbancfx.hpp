/*
 * Copyright 2026 The urbancfx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header.

#pragma once

#include "urbancfx/common.hpp"
#include "urbancfx/config.hpp"
#include "urbancfx/counterfactual.hpp"
#include "urbancfx/csv.hpp"
#include "urbancfx/dataset.hpp"
#include "urbancfx/explain.hpp"
#include "urbancfx/gabench.hpp"
#include "urbancfx/gbdt.hpp"
#include "urbancfx/geometry.hpp"
#include "urbancfx/kdtree.hpp"
#include "urbancfx/knn.hpp"
#include "urbancfx/model.hpp"
#include "urbancfx/scenario.hpp"
#include "urbancfx/simulate.hpp"
#include "urbancfx/surrogate.hpp"
#include "urbancfx/svg.hpp"
#include "urbancfx/validate.hpp"
