#include "faceforge/config.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "faceforge/rng.hpp"

namespace faceforge {

using nlohmann::json;

const char* augmentation_mode_name(AugmentationMode mode) {
    switch (mode) {
        case AugmentationMode::None: return "none";
        case AugmentationMode::AppearanceOnly: return "appearance-only";
        case AugmentationMode::Full: return "full";
    }
    return "full";
}

AugmentationMode augmentation_mode_from_name(const std::string& name) {
    if (name == "none") return AugmentationMode::None;
    if (name == "appearance-only") return AugmentationMode::AppearanceOnly;
    if (name == "full") return AugmentationMode::Full;
    fail(ErrorCode::Config, "unknown augmentation mode '" + name +
                                "' (expected none, appearance-only, or full)");
}

namespace {

json range_to_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from_json(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        fail(ErrorCode::Config, "config key '" + key + "' must be a [lo, hi] number pair");
    }
    return Range{j[0].get<double>(), j[1].get<double>()};
}

void check_range(const Range& r, const std::string& key) {
    require(std::isfinite(r.lo) && std::isfinite(r.hi), ErrorCode::Config,
            "config key '" + key + "' must be finite");
    require(r.lo <= r.hi, ErrorCode::Config,
            "config key '" + key + "' has lo > hi (empty range)");
}

void check_probability(double p, const std::string& key) {
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, ErrorCode::Config,
            "config key '" + key + "' must be a probability in [0, 1]");
}

void check_count(int c, const std::string& key) {
    require(c >= 1, ErrorCode::Config, "config key '" + key + "' must be >= 1");
}

}  // namespace

void GenerationConfig::validate() const {
    require(version == 1, ErrorCode::Config,
            "unsupported config version " + std::to_string(version));
    require(std::isfinite(identity_truncation_sigma) && identity_truncation_sigma >= 0.0,
            ErrorCode::Config, "config key 'identity.truncation_sigma' must be >= 0");
    check_probability(sequence_probability, "expression.sequence_probability");
    check_range(expression_clamp, "expression.clamp");
    for (const auto& [index, coeff] : eyelid_coupling) {
        require(index >= 0, ErrorCode::Config,
                "config key 'expression.eyelid_coupling' has a negative component index");
        require(std::isfinite(coeff), ErrorCode::Config,
                "config key 'expression.eyelid_coupling' has a non-finite coefficient");
    }
    check_range(gaze_yaw_deg, "gaze.yaw_deg");
    check_range(gaze_pitch_deg, "gaze.pitch_deg");
    for (int i = 0; i < 3; ++i) {
        check_range(neck_rotation_deg[i], "head_pose.neck_deg");
        check_range(head_rotation_deg[i], "head_pose.head_deg");
    }
    check_range(camera_distance_m, "camera.distance_m");
    require(camera_distance_m.lo > 0.0, ErrorCode::Config,
            "config key 'camera.distance_m' must be positive");
    check_range(camera_azimuth_deg, "camera.azimuth_deg");
    check_range(camera_elevation_deg, "camera.elevation_deg");
    check_range(focal_mm, "camera.focal_mm");
    require(focal_mm.lo > 0.0, ErrorCode::Config, "config key 'camera.focal_mm' must be positive");
    check_range(aperture_f, "camera.aperture_f");
    require(lookat_jitter >= 0.0 && lookat_jitter <= 1.0, ErrorCode::Config,
            "config key 'camera.lookat_jitter' must be in [0, 1]");
    check_count(environment_count, "environment.count");
    check_range(environment_intensity, "environment.intensity");
    check_count(hair_styles, "assets.hair_styles");
    check_count(eyebrow_styles, "assets.eyebrow_styles");
    check_count(beard_styles, "assets.beard_styles");
    check_count(eyelash_styles, "assets.eyelash_styles");
    check_count(outfit_styles, "assets.outfit_styles");
    check_count(headwear_styles, "assets.headwear_styles");
    check_count(facewear_styles, "assets.facewear_styles");
    check_count(eyewear_styles, "assets.eyewear_styles");
    check_probability(hair_probability, "assets.hair_probability");
    check_probability(beard_probability, "assets.beard_probability");
    check_probability(outfit_probability, "assets.outfit_probability");
    check_probability(headwear_probability, "assets.headwear_probability");
    check_probability(facewear_probability, "assets.facewear_probability");
    check_probability(eyewear_probability, "assets.eyewear_probability");
    check_range(melanin, "assets.melanin");
    check_range(grayness, "assets.grayness");
    require(landmark_depth_tolerance >= 0.0, ErrorCode::Config,
            "config key 'labels.landmark_depth_tolerance_m' must be >= 0");
    require(render_width >= 16 && render_height >= 16, ErrorCode::Config,
            "config key 'render.width/height' must be >= 16");

    check_range(augmentation.rotation_deg, "augmentation.rotation_deg");
    require(augmentation.perspective_jitter >= 0.0 && augmentation.perspective_jitter <= 0.25,
            ErrorCode::Config, "config key 'augmentation.perspective_jitter' must be in [0, 0.25]");
    check_range(augmentation.blur_radius_px, "augmentation.blur_radius_px");
    require(augmentation.blur_radius_px.lo >= 0.0, ErrorCode::Config,
            "config key 'augmentation.blur_radius_px' must be >= 0");
    check_range(augmentation.brightness, "augmentation.brightness");
    check_range(augmentation.contrast, "augmentation.contrast");
    check_range(augmentation.noise_sigma, "augmentation.noise_sigma");
    require(augmentation.noise_sigma.lo >= 0.0, ErrorCode::Config,
            "config key 'augmentation.noise_sigma' must be >= 0");
    check_probability(augmentation.grayscale_probability, "augmentation.grayscale_probability");
}

std::string GenerationConfig::to_json_string() const {
    json j;
    j["version"] = version;
    j["identity"]["truncation_sigma"] = identity_truncation_sigma;

    json expr;
    expr["sequence_probability"] = sequence_probability;
    expr["clamp"] = range_to_json(expression_clamp);
    json coupling = json::array();
    for (const auto& [index, coeff] : eyelid_coupling) coupling.push_back({index, coeff});
    expr["eyelid_coupling"] = coupling;
    j["expression"] = expr;

    j["gaze"]["yaw_deg"] = range_to_json(gaze_yaw_deg);
    j["gaze"]["pitch_deg"] = range_to_json(gaze_pitch_deg);

    auto axes = [](const std::array<Range, 3>& r) {
        return json::array({range_to_json(r[0]), range_to_json(r[1]), range_to_json(r[2])});
    };
    j["head_pose"]["neck_deg"] = axes(neck_rotation_deg);
    j["head_pose"]["head_deg"] = axes(head_rotation_deg);

    json cam;
    cam["distance_m"] = range_to_json(camera_distance_m);
    cam["azimuth_deg"] = range_to_json(camera_azimuth_deg);
    cam["elevation_deg"] = range_to_json(camera_elevation_deg);
    cam["focal_mm"] = range_to_json(focal_mm);
    cam["aperture_f"] = range_to_json(aperture_f);
    cam["lookat_jitter"] = lookat_jitter;
    j["camera"] = cam;

    j["environment"]["count"] = environment_count;
    j["environment"]["intensity"] = range_to_json(environment_intensity);

    json assets;
    assets["hair_styles"] = hair_styles;
    assets["eyebrow_styles"] = eyebrow_styles;
    assets["beard_styles"] = beard_styles;
    assets["eyelash_styles"] = eyelash_styles;
    assets["outfit_styles"] = outfit_styles;
    assets["headwear_styles"] = headwear_styles;
    assets["facewear_styles"] = facewear_styles;
    assets["eyewear_styles"] = eyewear_styles;
    assets["hair_probability"] = hair_probability;
    assets["beard_probability"] = beard_probability;
    assets["outfit_probability"] = outfit_probability;
    assets["headwear_probability"] = headwear_probability;
    assets["facewear_probability"] = facewear_probability;
    assets["eyewear_probability"] = eyewear_probability;
    assets["melanin"] = range_to_json(melanin);
    assets["grayness"] = range_to_json(grayness);
    j["assets"] = assets;

    j["toggles"]["hair_enabled"] = hair_enabled;
    j["toggles"]["clothing_enabled"] = clothing_enabled;

    j["labels"]["dense_landmarks"] = dense_landmarks;
    j["labels"]["landmark_depth_tolerance_m"] = landmark_depth_tolerance;
    j["labels"]["color_supersample"] = color_supersample;

    j["render"]["width"] = render_width;
    j["render"]["height"] = render_height;

    json aug;
    aug["mode"] = augmentation_mode_name(augmentation.mode);
    aug["rotation_deg"] = range_to_json(augmentation.rotation_deg);
    aug["perspective_jitter"] = augmentation.perspective_jitter;
    aug["blur_radius_px"] = range_to_json(augmentation.blur_radius_px);
    aug["brightness"] = range_to_json(augmentation.brightness);
    aug["contrast"] = range_to_json(augmentation.contrast);
    aug["noise_sigma"] = range_to_json(augmentation.noise_sigma);
    aug["grayscale_probability"] = augmentation.grayscale_probability;
    j["augmentation"] = aug;

    return j.dump(2) + "\n";
}

GenerationConfig GenerationConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }

    GenerationConfig cfg;
    try {
        if (j.contains("version")) cfg.version = j["version"].get<int>();
        if (j.contains("identity") && j["identity"].contains("truncation_sigma"))
            cfg.identity_truncation_sigma = j["identity"]["truncation_sigma"].get<double>();
        if (j.contains("expression")) {
            const json& e = j["expression"];
            if (e.contains("sequence_probability"))
                cfg.sequence_probability = e["sequence_probability"].get<double>();
            if (e.contains("clamp")) cfg.expression_clamp = range_from_json(e["clamp"], "expression.clamp");
            if (e.contains("eyelid_coupling")) {
                cfg.eyelid_coupling.clear();
                for (const auto& pair : e["eyelid_coupling"]) {
                    cfg.eyelid_coupling.emplace_back(pair[0].get<int>(), pair[1].get<double>());
                }
            }
        }
        if (j.contains("gaze")) {
            if (j["gaze"].contains("yaw_deg"))
                cfg.gaze_yaw_deg = range_from_json(j["gaze"]["yaw_deg"], "gaze.yaw_deg");
            if (j["gaze"].contains("pitch_deg"))
                cfg.gaze_pitch_deg = range_from_json(j["gaze"]["pitch_deg"], "gaze.pitch_deg");
        }
        if (j.contains("head_pose")) {
            auto read_axes = [](const json& a, const std::string& key) {
                std::array<Range, 3> out;
                for (int i = 0; i < 3; ++i) out[i] = range_from_json(a[i], key);
                return out;
            };
            if (j["head_pose"].contains("neck_deg"))
                cfg.neck_rotation_deg = read_axes(j["head_pose"]["neck_deg"], "head_pose.neck_deg");
            if (j["head_pose"].contains("head_deg"))
                cfg.head_rotation_deg = read_axes(j["head_pose"]["head_deg"], "head_pose.head_deg");
        }
        if (j.contains("camera")) {
            const json& c = j["camera"];
            if (c.contains("distance_m")) cfg.camera_distance_m = range_from_json(c["distance_m"], "camera.distance_m");
            if (c.contains("azimuth_deg")) cfg.camera_azimuth_deg = range_from_json(c["azimuth_deg"], "camera.azimuth_deg");
            if (c.contains("elevation_deg")) cfg.camera_elevation_deg = range_from_json(c["elevation_deg"], "camera.elevation_deg");
            if (c.contains("focal_mm")) cfg.focal_mm = range_from_json(c["focal_mm"], "camera.focal_mm");
            if (c.contains("aperture_f")) cfg.aperture_f = range_from_json(c["aperture_f"], "camera.aperture_f");
            if (c.contains("lookat_jitter")) cfg.lookat_jitter = c["lookat_jitter"].get<double>();
        }
        if (j.contains("environment")) {
            if (j["environment"].contains("count")) cfg.environment_count = j["environment"]["count"].get<int>();
            if (j["environment"].contains("intensity"))
                cfg.environment_intensity = range_from_json(j["environment"]["intensity"], "environment.intensity");
        }
        if (j.contains("assets")) {
            const json& a = j["assets"];
            auto geti = [&](const char* key, int& out) { if (a.contains(key)) out = a[key].get<int>(); };
            auto getd = [&](const char* key, double& out) { if (a.contains(key)) out = a[key].get<double>(); };
            geti("hair_styles", cfg.hair_styles);
            geti("eyebrow_styles", cfg.eyebrow_styles);
            geti("beard_styles", cfg.beard_styles);
            geti("eyelash_styles", cfg.eyelash_styles);
            geti("outfit_styles", cfg.outfit_styles);
            geti("headwear_styles", cfg.headwear_styles);
            geti("facewear_styles", cfg.facewear_styles);
            geti("eyewear_styles", cfg.eyewear_styles);
            getd("hair_probability", cfg.hair_probability);
            getd("beard_probability", cfg.beard_probability);
            getd("outfit_probability", cfg.outfit_probability);
            getd("headwear_probability", cfg.headwear_probability);
            getd("facewear_probability", cfg.facewear_probability);
            getd("eyewear_probability", cfg.eyewear_probability);
            if (a.contains("melanin")) cfg.melanin = range_from_json(a["melanin"], "assets.melanin");
            if (a.contains("grayness")) cfg.grayness = range_from_json(a["grayness"], "assets.grayness");
        }
        if (j.contains("toggles")) {
            if (j["toggles"].contains("hair_enabled")) cfg.hair_enabled = j["toggles"]["hair_enabled"].get<bool>();
            if (j["toggles"].contains("clothing_enabled"))
                cfg.clothing_enabled = j["toggles"]["clothing_enabled"].get<bool>();
        }
        if (j.contains("labels")) {
            const json& l = j["labels"];
            if (l.contains("dense_landmarks")) cfg.dense_landmarks = l["dense_landmarks"].get<bool>();
            if (l.contains("landmark_depth_tolerance_m"))
                cfg.landmark_depth_tolerance = l["landmark_depth_tolerance_m"].get<double>();
            if (l.contains("color_supersample")) cfg.color_supersample = l["color_supersample"].get<bool>();
        }
        if (j.contains("render")) {
            if (j["render"].contains("width")) cfg.render_width = j["render"]["width"].get<int>();
            if (j["render"].contains("height")) cfg.render_height = j["render"]["height"].get<int>();
        }
        if (j.contains("augmentation")) {
            const json& a = j["augmentation"];
            if (a.contains("mode")) cfg.augmentation.mode = augmentation_mode_from_name(a["mode"].get<std::string>());
            if (a.contains("rotation_deg"))
                cfg.augmentation.rotation_deg = range_from_json(a["rotation_deg"], "augmentation.rotation_deg");
            if (a.contains("perspective_jitter"))
                cfg.augmentation.perspective_jitter = a["perspective_jitter"].get<double>();
            if (a.contains("blur_radius_px"))
                cfg.augmentation.blur_radius_px = range_from_json(a["blur_radius_px"], "augmentation.blur_radius_px");
            if (a.contains("brightness"))
                cfg.augmentation.brightness = range_from_json(a["brightness"], "augmentation.brightness");
            if (a.contains("contrast"))
                cfg.augmentation.contrast = range_from_json(a["contrast"], "augmentation.contrast");
            if (a.contains("noise_sigma"))
                cfg.augmentation.noise_sigma = range_from_json(a["noise_sigma"], "augmentation.noise_sigma");
            if (a.contains("grayscale_probability"))
                cfg.augmentation.grayscale_probability = a["grayscale_probability"].get<double>();
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("malformed config value: ") + e.what());
    }

    cfg.validate();
    return cfg;
}

void GenerationConfig::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::Io, "cannot open config file for writing: " + path);
    out << to_json_string();
    require(out.good(), ErrorCode::Io, "failed writing config file: " + path);
}

GenerationConfig GenerationConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

std::uint64_t GenerationConfig::hash() const { return fnv1a64(to_json_string()); }

}  // namespace faceforge
