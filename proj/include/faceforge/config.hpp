#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "faceforge/types.hpp"

namespace faceforge {

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool degenerate() const { return lo == hi; }
};

enum class AugmentationMode { None, AppearanceOnly, Full };

const char* augmentation_mode_name(AugmentationMode mode);
AugmentationMode augmentation_mode_from_name(const std::string& name);

struct AugmentationConfig {
    AugmentationMode mode = AugmentationMode::Full;
    Range rotation_deg{-30.0, 30.0};
    double perspective_jitter = 0.05;  // corner jitter, fraction of width
    Range blur_radius_px{0.0, 2.0};
    Range brightness{-0.2, 0.2};
    Range contrast{0.7, 1.3};
    Range noise_sigma{0.0, 0.03};
    double grayscale_probability = 0.1;
};

// All sampling ranges for scene assembly plus the ablation toggles.
// Serialized as a versioned key/value JSON document with units in the key
// names (deg/mm/m).
struct GenerationConfig {
    int version = 1;

    // identity
    double identity_truncation_sigma = 3.0;

    // expression
    double sequence_probability = 0.25;
    Range expression_clamp{-1.6, 1.6};
    std::vector<std::pair<int, double>> eyelid_coupling = {{3, 0.8}, {4, 0.8}};

    // gaze (shared by both eyes)
    Range gaze_yaw_deg{-25.0, 25.0};
    Range gaze_pitch_deg{-18.0, 18.0};

    // head pose, per joint axis
    std::array<Range, 3> neck_rotation_deg{Range{-8.0, 8.0}, Range{-16.0, 16.0}, Range{-6.0, 6.0}};
    std::array<Range, 3> head_rotation_deg{Range{-10.0, 10.0}, Range{-14.0, 14.0}, Range{-5.0, 5.0}};

    // camera shell sector in front of the face
    Range camera_distance_m{0.45, 0.80};
    Range camera_azimuth_deg{-60.0, 60.0};
    Range camera_elevation_deg{-25.0, 25.0};
    Range focal_mm{50.0, 85.0};  // 36mm-equivalent
    Range aperture_f{2.0, 8.0};
    double lookat_jitter = 0.25;  // fraction of head bounds half-extent

    // environment slot: analytic key light + ambient stand-in
    int environment_count = 448;
    Range environment_intensity{0.25, 1.0};

    // asset collections (paper-scale defaults)
    int hair_styles = 512;
    int eyebrow_styles = 162;
    int beard_styles = 142;
    int eyelash_styles = 42;
    int outfit_styles = 30;
    int headwear_styles = 36;
    int facewear_styles = 7;
    int eyewear_styles = 11;
    double hair_probability = 0.85;
    double beard_probability = 0.30;
    double outfit_probability = 1.0;  // faces are always dressed; accessories are optional
    double headwear_probability = 0.12;
    double facewear_probability = 0.05;
    double eyewear_probability = 0.18;
    Range melanin{0.05, 0.95};
    Range grayness{0.0, 1.0};

    // ablation toggles
    bool hair_enabled = true;
    bool clothing_enabled = true;

    // labels
    bool dense_landmarks = false;
    double landmark_depth_tolerance = 0.008;  // meters
    bool color_supersample = false;

    // render
    int render_width = 256;
    int render_height = 256;

    AugmentationConfig augmentation;

    // Throws Error(Config) naming the offending key.
    void validate() const;

    std::string to_json_string() const;
    static GenerationConfig from_json_string(const std::string& text);

    void save(const std::string& path) const;
    static GenerationConfig load(const std::string& path);

    // FNV-1a of the canonical serialization.
    std::uint64_t hash() const;
};

}  // namespace faceforge
