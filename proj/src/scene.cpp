#include "faceforge/scene.hpp"

#include <cmath>

#include <json.hpp>

namespace faceforge {

using nlohmann::json;

namespace {

constexpr double kDegToRad = M_PI / 180.0;

double sample_range(const Range& r, Rng& rng) { return rng.uniform(r.lo, r.hi); }

json vec_to_json(const Vector& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vec_from_json(const json& a) {
    Vector v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
    return v;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& a) {
    return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

int sample_slot(Rng& rng, double probability, int collection_size) {
    if (!rng.bernoulli(probability)) return -1;
    return static_cast<int>(rng.uniform_index(collection_size));
}

}  // namespace

Eigen::AlignedBox3d head_bounds(const FaceRig& rig) {
    Eigen::AlignedBox3d box;
    for (int v = 0; v < rig.vertex_count(); ++v) {
        box.extend(Vec3(rig.template_vertices.row(v)));
    }
    return box;
}

Vector sample_expression(const ExpressionLibrary& library, double sequence_probability, Rng& rng) {
    require(!library.entries.empty() || !library.sequence.empty(), ErrorCode::Config,
            "expression library is empty");
    const bool use_sequence =
        !library.sequence.empty() &&
        (library.entries.empty() || rng.bernoulli(sequence_probability));
    const auto& source = use_sequence ? library.sequence : library.entries;
    return source[rng.uniform_index(source.size())];
}

PoseParams apply_gaze(const PoseParams& pose, const GazeParams& gaze, const FaceRig& rig) {
    const int left = rig.joint_index("left_eye");
    const int right = rig.joint_index("right_eye");
    require(left >= 0 && right >= 0, ErrorCode::Config,
            "rig has no eye joints; gaze layering needs joints named left_eye and right_eye");

    PoseParams out = pose;
    out.joint_rotations.row(left) << gaze.pitch, gaze.yaw, 0.0;
    out.joint_rotations.row(right) << gaze.pitch, gaze.yaw, 0.0;
    return out;
}

Vector eyelid_pose(const Vector& psi, const GazeParams& gaze,
                   const std::vector<std::pair<int, double>>& coupling, const Range& clamp) {
    Vector out = psi;
    for (const auto& [index, coefficient] : coupling) {
        require(index >= 0 && index < out.size(), ErrorCode::InvalidParameter,
                "eyelid coupling index " + std::to_string(index) + " out of range for |psi|=" +
                    std::to_string(out.size()));
        out(index) = std::clamp(out(index) + coefficient * gaze.pitch, clamp.lo, clamp.hi);
    }
    return out;
}

CameraSpec sample_camera(const GenerationConfig& config, const Eigen::AlignedBox3d& bounds,
                         Rng& rng) {
    const Vec3 center = bounds.center();
    const double azimuth = sample_range(config.camera_azimuth_deg, rng) * kDegToRad;
    const double elevation = sample_range(config.camera_elevation_deg, rng) * kDegToRad;
    const double distance = sample_range(config.camera_distance_m, rng);

    CameraSpec cam;
    cam.position = center + distance * Vec3(std::cos(elevation) * std::sin(azimuth),
                                            std::sin(elevation),
                                            std::cos(elevation) * std::cos(azimuth));
    const Vec3 half = 0.5 * bounds.sizes();
    Vec3 jitter;
    for (int i = 0; i < 3; ++i) jitter(i) = config.lookat_jitter * half(i) * rng.uniform(-1.0, 1.0);
    cam.look_at = (center + jitter).cwiseMax(bounds.min()).cwiseMin(bounds.max());
    cam.focal_mm = sample_range(config.focal_mm, rng);
    cam.aperture_f = sample_range(config.aperture_f, rng);
    return cam;
}

SceneDescription assemble_scene(const GenerationConfig& config, const ModelAssets& assets,
                                std::uint64_t seed) {
    config.validate();
    require(assets.rig != nullptr && assets.library != nullptr, ErrorCode::Config,
            "scene assembly needs a rig and an expression library");
    const FaceRig& rig = *assets.rig;

    SceneDescription scene;
    scene.seed = seed;
    scene.hair_enabled = config.hair_enabled;
    scene.clothing_enabled = config.clothing_enabled;

    {
        Rng rng(derive_seed(seed, "identity"));
        if (assets.identity != nullptr) {
            scene.identity =
                sample_identity(*assets.identity, rng, config.identity_truncation_sigma)
                    .coefficients;
        } else {
            scene.identity.resize(rig.identity_dims());
            for (int i = 0; i < scene.identity.size(); ++i) {
                double z = rng.normal();
                if (config.identity_truncation_sigma > 0.0) {
                    z = std::clamp(z, -config.identity_truncation_sigma,
                                   config.identity_truncation_sigma);
                }
                scene.identity(i) = z;
            }
        }
    }

    {
        Rng rng(derive_seed(seed, "gaze"));
        scene.gaze.yaw = sample_range(config.gaze_yaw_deg, rng) * kDegToRad;
        scene.gaze.pitch = sample_range(config.gaze_pitch_deg, rng) * kDegToRad;
    }

    {
        Rng rng(derive_seed(seed, "expression"));
        Vector psi = sample_expression(*assets.library, config.sequence_probability, rng);
        require(psi.size() == rig.expression_dims(), ErrorCode::Config,
                "expression library dimension does not match the rig");
        scene.expression = eyelid_pose(psi, scene.gaze, config.eyelid_coupling,
                                       config.expression_clamp);
    }

    {
        Rng rng(derive_seed(seed, "head-pose"));
        PoseParams pose = PoseParams::zero(rig.joint_count());
        const int neck = rig.joint_index("neck");
        const int head = rig.joint_index("head");
        for (int c = 0; c < 3; ++c) {
            if (neck >= 0) pose.joint_rotations(neck, c) = sample_range(config.neck_rotation_deg[c], rng) * kDegToRad;
            if (head >= 0) pose.joint_rotations(head, c) = sample_range(config.head_rotation_deg[c], rng) * kDegToRad;
        }
        scene.pose = apply_gaze(pose, scene.gaze, rig);
    }

    {
        Rng rng(derive_seed(seed, "camera"));
        scene.camera = sample_camera(config, head_bounds(rig), rng);
    }

    {
        Rng rng(derive_seed(seed, "environment"));
        scene.environment.id = static_cast<int>(rng.uniform_index(config.environment_count));
        scene.environment.rotation = rng.uniform(0.0, 2.0 * M_PI);
        scene.environment.intensity = sample_range(config.environment_intensity, rng);
    }

    {
        Rng rng(derive_seed(seed, "hair"));
        scene.slots.hair_style =
            config.hair_enabled ? sample_slot(rng, config.hair_probability, config.hair_styles) : -1;
    }
    {
        Rng rng(derive_seed(seed, "eyebrow"));
        scene.slots.eyebrow = static_cast<int>(rng.uniform_index(config.eyebrow_styles));
    }
    {
        Rng rng(derive_seed(seed, "beard"));
        scene.slots.beard =
            config.hair_enabled ? sample_slot(rng, config.beard_probability, config.beard_styles) : -1;
    }
    {
        Rng rng(derive_seed(seed, "eyelashes"));
        scene.slots.eyelashes = static_cast<int>(rng.uniform_index(config.eyelash_styles));
    }
    {
        Rng rng(derive_seed(seed, "hair-color"));
        scene.slots.melanin = sample_range(config.melanin, rng);
        scene.slots.grayness = sample_range(config.grayness, rng);
    }
    {
        Rng rng(derive_seed(seed, "outfit"));
        scene.slots.outfit = config.clothing_enabled
                                 ? sample_slot(rng, config.outfit_probability, config.outfit_styles)
                                 : -1;
    }
    {
        Rng rng(derive_seed(seed, "headwear"));
        scene.slots.headwear =
            config.clothing_enabled
                ? sample_slot(rng, config.headwear_probability, config.headwear_styles)
                : -1;
    }
    {
        Rng rng(derive_seed(seed, "facewear"));
        scene.slots.facewear =
            config.clothing_enabled
                ? sample_slot(rng, config.facewear_probability, config.facewear_styles)
                : -1;
    }
    {
        Rng rng(derive_seed(seed, "eyewear"));
        scene.slots.eyewear =
            config.clothing_enabled
                ? sample_slot(rng, config.eyewear_probability, config.eyewear_styles)
                : -1;
    }

    return scene;
}

std::string SceneDescription::to_json_string() const {
    json j;
    j["seed"] = seed;
    j["identity"] = vec_to_json(identity);
    j["expression"] = vec_to_json(expression);
    json rot = json::array();
    for (int r = 0; r < pose.joint_rotations.rows(); ++r) {
        rot.push_back(json::array({pose.joint_rotations(r, 0), pose.joint_rotations(r, 1),
                                   pose.joint_rotations(r, 2)}));
    }
    j["pose_rad"] = rot;
    j["gaze_rad"] = {{"yaw", gaze.yaw}, {"pitch", gaze.pitch}};
    j["slots"] = {{"hair_style", slots.hair_style},
                  {"eyebrow", slots.eyebrow},
                  {"beard", slots.beard},
                  {"eyelashes", slots.eyelashes},
                  {"melanin", slots.melanin},
                  {"grayness", slots.grayness},
                  {"outfit", slots.outfit},
                  {"headwear", slots.headwear},
                  {"facewear", slots.facewear},
                  {"eyewear", slots.eyewear}};
    j["camera"] = {{"position_m", vec3_to_json(camera.position)},
                   {"look_at_m", vec3_to_json(camera.look_at)},
                   {"focal_mm", camera.focal_mm},
                   {"aperture_f", camera.aperture_f}};
    j["environment"] = {{"id", environment.id},
                        {"rotation_rad", environment.rotation},
                        {"intensity", environment.intensity}};
    j["flags"] = {{"hair_enabled", hair_enabled}, {"clothing_enabled", clothing_enabled}};
    return j.dump();
}

SceneDescription SceneDescription::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Io, std::string("scene record is not valid JSON: ") + e.what());
    }
    SceneDescription s;
    try {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.identity = vec_from_json(j.at("identity"));
        s.expression = vec_from_json(j.at("expression"));
        const json& rot = j.at("pose_rad");
        s.pose.joint_rotations.resize(static_cast<int>(rot.size()), 3);
        for (std::size_t r = 0; r < rot.size(); ++r) {
            for (int c = 0; c < 3; ++c) s.pose.joint_rotations(static_cast<int>(r), c) = rot[r][c].get<double>();
        }
        s.gaze.yaw = j.at("gaze_rad").at("yaw").get<double>();
        s.gaze.pitch = j.at("gaze_rad").at("pitch").get<double>();
        const json& slots = j.at("slots");
        s.slots.hair_style = slots.at("hair_style").get<int>();
        s.slots.eyebrow = slots.at("eyebrow").get<int>();
        s.slots.beard = slots.at("beard").get<int>();
        s.slots.eyelashes = slots.at("eyelashes").get<int>();
        s.slots.melanin = slots.at("melanin").get<double>();
        s.slots.grayness = slots.at("grayness").get<double>();
        s.slots.outfit = slots.at("outfit").get<int>();
        s.slots.headwear = slots.at("headwear").get<int>();
        s.slots.facewear = slots.at("facewear").get<int>();
        s.slots.eyewear = slots.at("eyewear").get<int>();
        const json& cam = j.at("camera");
        s.camera.position = vec3_from_json(cam.at("position_m"));
        s.camera.look_at = vec3_from_json(cam.at("look_at_m"));
        s.camera.focal_mm = cam.at("focal_mm").get<double>();
        s.camera.aperture_f = cam.at("aperture_f").get<double>();
        const json& env = j.at("environment");
        s.environment.id = env.at("id").get<int>();
        s.environment.rotation = env.at("rotation_rad").get<double>();
        s.environment.intensity = env.at("intensity").get<double>();
        s.hair_enabled = j.at("flags").at("hair_enabled").get<bool>();
        s.clothing_enabled = j.at("flags").at("clothing_enabled").get<bool>();
    } catch (const json::exception& e) {
        fail(ErrorCode::Io, std::string("malformed scene record: ") + e.what());
    }
    return s;
}

}  // namespace faceforge
