// Copyright 2026 The qkdplan Authors
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

#include "qkdplan/branch_and_bound.hpp"
#include "qkdplan/cost_model.hpp"
#include "qkdplan/exhaustive.hpp"
#include "qkdplan/experiments.hpp"
#include "qkdplan/instance.hpp"
#include "qkdplan/lp_format.hpp"
#include "qkdplan/milp_model.hpp"
#include "qkdplan/rational.hpp"
#include "qkdplan/scenario.hpp"
#include "qkdplan/simplex.hpp"
#include "qkdplan/sp_builder.hpp"
#include "qkdplan/topology.hpp"
