// Copyright 2026 The lapkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "lapkit/error.hpp"
#include "lapkit/lap_probe.hpp"
#include "lapkit/linalg.hpp"
#include "lapkit/ls_solver.hpp"
#include "lapkit/models.hpp"
#include "lapkit/operator_core.hpp"
#include "lapkit/resonance.hpp"
#include "lapkit/rng.hpp"
#include "lapkit/verifier.hpp"
