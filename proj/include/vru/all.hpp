// Copyright 2026 The VRU Unlearning Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "vru/audit.hpp"
#include "vru/baselines.hpp"
#include "vru/budget.hpp"
#include "vru/dataset.hpp"
#include "vru/errors.hpp"
#include "vru/logistic.hpp"
#include "vru/loss.hpp"
#include "vru/privacy.hpp"
#include "vru/projection.hpp"
#include "vru/psgd.hpp"
#include "vru/quadratic.hpp"
#include "vru/retrain.hpp"
#include "vru/rng.hpp"
#include "vru/schedule.hpp"
#include "vru/unlearn.hpp"
