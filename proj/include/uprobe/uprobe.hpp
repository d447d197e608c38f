#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

// Convenience umbrella header.

#include "uprobe/dataset.hpp"
#include "uprobe/errors.hpp"
#include "uprobe/guidance.hpp"
#include "uprobe/harness.hpp"
#include "uprobe/log.hpp"
#include "uprobe/metrics.hpp"
#include "uprobe/ngram.hpp"
#include "uprobe/provider.hpp"
#include "uprobe/report.hpp"
#include "uprobe/types.hpp"
#include "uprobe/util.hpp"
#include "uprobe/wire.hpp"
