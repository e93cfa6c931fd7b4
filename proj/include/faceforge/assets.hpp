#pragma once

#include <vector>

#include "faceforge/model_learning.hpp"
#include "faceforge/rig.hpp"

namespace faceforge {

struct DeskRigOptions {
    int identity_dims = 50;
    int expression_dims = 25;
    bool dense_landmarks = true;
    std::uint64_t seed = 20240101;  // versioned rig data; bump to change the asset
};

// Procedurally built low-poly head (~600 vertices) with semantic regions,
// 68 sparse + 679 dense landmark anchors, a 4-joint skeleton
// (neck -> head -> {left eye, right eye}) and smooth identity/expression
// bases. Fully deterministic for given options.
FaceRig build_desk_rig(const DeskRigOptions& options = {});

// Expression collection: library entries plus an animated keyframe sequence.
struct ExpressionLibrary {
    std::vector<Vector> entries;
    std::vector<Vector> sequence;
};

ExpressionLibrary build_expression_library(const FaceRig& rig, int entry_count = 256,
                                           int sequence_length = 32,
                                           std::uint64_t seed = 7100);

// Synthetic registered-scan corpus drawn from the rig's own identity basis,
// optionally with per-coordinate Gaussian vertex noise.
ScanCorpus synthesize_corpus(const FaceRig& rig, int scan_count, double noise_sigma,
                             std::uint64_t seed);

}  // namespace faceforge
