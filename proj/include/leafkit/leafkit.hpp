// Copyright 2026 The leafkit Authors. All Rights Reserved.
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


// Everything in one include.

#pragma once

#include "leafkit/analysis/filters.hpp"
#include "leafkit/augment/augment.hpp"
#include "leafkit/backend/model.hpp"
#include "leafkit/core/error.hpp"
#include "leafkit/core/io.hpp"
#include "leafkit/core/log.hpp"
#include "leafkit/core/rng.hpp"
#include "leafkit/dataset/chunk.hpp"
#include "leafkit/dataset/ingest.hpp"
#include "leafkit/dataset/manifest.hpp"
#include "leafkit/dataset/split.hpp"
#include "leafkit/dsp/fft.hpp"
#include "leafkit/dsp/kernels.hpp"
#include "leafkit/dsp/mel.hpp"
#include "leafkit/dsp/signal.hpp"
#include "leafkit/dsp/stft.hpp"
#include "leafkit/dsp/wav.hpp"
#include "leafkit/frontend/frontend.hpp"
#include "leafkit/frontend/gabor_pool.hpp"
#include "leafkit/frontend/leaf_params.hpp"
#include "leafkit/frontend/pcen.hpp"
#include "leafkit/metrics/evaluate.hpp"
#include "leafkit/metrics/metrics.hpp"
#include "leafkit/tensor/adam.hpp"
#include "leafkit/tensor/conv.hpp"
#include "leafkit/tensor/gradcheck.hpp"
#include "leafkit/tensor/nn.hpp"
#include "leafkit/tensor/ops.hpp"
#include "leafkit/tensor/tensor.hpp"
#include "leafkit/training/checkpoint.hpp"
#include "leafkit/training/config.hpp"
#include "leafkit/training/trainer.hpp"
