// Copyright 2026 The qsalab Authors
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

#include "qsalab/anneal_classical.hpp"
#include "qsalab/anneal_quantum.hpp"
#include "qsalab/bundled.hpp"
#include "qsalab/chains.hpp"
#include "qsalab/error.hpp"
#include "qsalab/instances.hpp"
#include "qsalab/lab.hpp"
#include "qsalab/report.hpp"
#include "qsalab/rng.hpp"
#include "qsalab/terminal_beta.hpp"
#include "qsalab/walk.hpp"
