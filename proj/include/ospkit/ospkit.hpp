// Copyright 2026 The ospkit Authors
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

// Umbrella header.

#include "ospkit/io.hpp"
#include "ospkit/ironing.hpp"
#include "ospkit/mechanism.hpp"
#include "ospkit/osp_graph.hpp"
#include "ospkit/rational.hpp"
#include "ospkit/report.hpp"
#include "ospkit/scheduling.hpp"
#include "ospkit/shortest_walks.hpp"
#include "ospkit/three_way.hpp"
