/*
 * Copyright 2026 The Doris Authors.
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

#include "doris/config.hpp"
#include "doris/core.hpp"
#include "doris/criteria.hpp"
#include "doris/error.hpp"
#include "doris/eval.hpp"
#include "doris/explain.hpp"
#include "doris/features.hpp"
#include "doris/gbt.hpp"
#include "doris/isotonic.hpp"
#include "doris/keywords.hpp"
#include "doris/mock.hpp"
#include "doris/mood.hpp"
#include "doris/pipeline.hpp"
#include "doris/prompts.hpp"
#include "doris/providers.hpp"
#include "doris/remote.hpp"
#include "doris/synth.hpp"
#include "doris/templates.hpp"
#include "doris/util.hpp"
