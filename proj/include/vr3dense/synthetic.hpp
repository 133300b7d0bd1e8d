// Copyright 2026 The VR3Dense Authors
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

#include "vr3dense/depth_losses.hpp"

namespace vr3dense {

/// Analytic stereo scene: the right view resamples the same continuous
/// texture shifted by focal * baseline / depth, so the pair is photometrically
/// consistent with the depth field up to interpolation error. Used by the toy
/// depth fitter demos and the test fixtures.
struct SyntheticScene {
  StereoPair pair;
  DepthMap depth;  // shared by both views
};

/// Smooth depth field (gentle horizontal/vertical waves around 20 m) under a
/// band-limited three-channel texture.
SyntheticScene make_smooth_scene(Index height, Index width, double focal, double baseline);

/// Same texture family plus a soft vertical depth edge co-located with a
/// brightness edge; exercises edge-aware regularizers.
SyntheticScene make_edge_scene(Index height, Index width, double focal, double baseline);

}  // namespace vr3dense
