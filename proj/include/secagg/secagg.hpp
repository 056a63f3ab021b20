/*
 * Copyright 2026 The secagg-dp Authors
 *
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

#ifndef SECAGG_SECAGG_HPP_
#define SECAGG_SECAGG_HPP_

#include "secagg/config.hpp"
#include "secagg/digest.hpp"
#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/harness.hpp"
#include "secagg/matrix.hpp"
#include "secagg/model.hpp"
#include "secagg/parallel.hpp"
#include "secagg/random.hpp"
#include "secagg/rational.hpp"
#include "secagg/scheme_baseline.hpp"
#include "secagg/scheme_multi.hpp"
#include "secagg/scheme_single.hpp"
#include "secagg/serialize.hpp"
#include "secagg/verify.hpp"

#endif  // SECAGG_SECAGG_HPP_
