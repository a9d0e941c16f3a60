// Copyright 2026 The itoprop developers
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

#include "itoprop/catalog_io.hpp"
#include "itoprop/config.hpp"
#include "itoprop/core.hpp"
#include "itoprop/expmv.hpp"
#include "itoprop/gates.hpp"
#include "itoprop/generator.hpp"
#include "itoprop/interp.hpp"
#include "itoprop/krotov.hpp"
#include "itoprop/models.hpp"
#include "itoprop/propagator.hpp"
#include "itoprop/sweep.hpp"
