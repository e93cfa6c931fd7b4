#pragma once

#include <optional>
#include <string>

#include "faceforge/assets.hpp"
#include "faceforge/config.hpp"
#include "faceforge/face_model.hpp"
#include "faceforge/model_learning.hpp"

namespace faceforge {

struct GazeParams {
    double yaw = 0.0;    // radians, shared by both eyes
    double pitch = 0.0;  // radians, positive looks down
};

// Sampled asset-slot metadata; -1 means the slot is empty.
struct AssetSlots {
    int hair_style = -1;
    int eyebrow = 0;
    int beard = -1;
    int eyelashes = 0;
    double melanin = 0.5;
    double grayness = 0.0;
    int outfit = -1;
    int headwear = -1;
    int facewear = -1;
    int eyewear = -1;
};

struct CameraSpec {
    Vec3 position = Vec3::Zero();
    Vec3 look_at = Vec3::Zero();
    double focal_mm = 50.0;  // 36mm-equivalent
    double aperture_f = 4.0;
};

struct EnvironmentSpec {
    int id = 0;
    double rotation = 0.0;  // radians
    double intensity = 1.0;
};

// One fully-sampled synthetic individual; the unit of generation.
// Fully determined by (config, seed).
struct SceneDescription {
    std::uint64_t seed = 0;
    Vector identity;        // beta
    Vector expression;      // psi, after eyelid coupling
    PoseParams pose;        // after gaze layering
    GazeParams gaze;
    AssetSlots slots;
    CameraSpec camera;
    EnvironmentSpec environment;
    bool hair_enabled = true;
    bool clothing_enabled = true;

    std::string to_json_string() const;
    static SceneDescription from_json_string(const std::string& text);
};

// Immutable assets shared by all workers. The identity distribution is
// optional; without one, identity parameters are drawn standard normal.
struct ModelAssets {
    const FaceRig* rig = nullptr;
    const IdentityDistribution* identity = nullptr;
    const ExpressionLibrary* library = nullptr;
};

Eigen::AlignedBox3d head_bounds(const FaceRig& rig);

// Draws from the animated sequence with probability p_seq, else from the
// library entries.
Vector sample_expression(const ExpressionLibrary& library, double sequence_probability, Rng& rng);

// Writes (pitch, yaw, 0) into both eye joints; other joints untouched.
PoseParams apply_gaze(const PoseParams& pose, const GazeParams& gaze, const FaceRig& rig);

// psi'_i = psi_i + coefficient_i * pitch for the coupled eyelid components,
// clamped to the configured expression range.
Vector eyelid_pose(const Vector& psi, const GazeParams& gaze,
                   const std::vector<std::pair<int, double>>& coupling, const Range& clamp);

CameraSpec sample_camera(const GenerationConfig& config, const Eigen::AlignedBox3d& bounds,
                         Rng& rng);

// Every field draws from its own sub-stream derived from (seed, field tag).
SceneDescription assemble_scene(const GenerationConfig& config, const ModelAssets& assets,
                                std::uint64_t seed);

}  // namespace faceforge
