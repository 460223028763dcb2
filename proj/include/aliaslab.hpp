// SPDX-License-Identifier: Apache-2.0
//
// aliaslab - microphone-array spatial aliasing laboratory
// Copyright (C) 2026 The aliaslab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#pragma once

#include "aliaslab/beamforming.hpp"
#include "aliaslab/common.hpp"
#include "aliaslab/fft.hpp"
#include "aliaslab/geometry.hpp"
#include "aliaslab/metrics.hpp"
#include "aliaslab/parallel.hpp"
#include "aliaslab/pipelines.hpp"
#include "aliaslab/png.hpp"
#include "aliaslab/postfilter.hpp"
#include "aliaslab/random.hpp"
#include "aliaslab/room.hpp"
#include "aliaslab/scene.hpp"
#include "aliaslab/signal.hpp"
#include "aliaslab/spatial_eval.hpp"
#include "aliaslab/stft.hpp"
#include "aliaslab/wav.hpp"
