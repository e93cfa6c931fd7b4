#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "faceforge/proxies.hpp"
#include "faceforge/scene.hpp"

using namespace faceforge;

namespace {

// chi-square critical values at p = 0.01
constexpr double kChi2Crit15 = 30.578;  // 15 dof

struct Fixture {
    FaceRig rig = build_desk_rig({12, 8, false, 99});
    ExpressionLibrary library = build_expression_library(rig, 64, 16, 5);
    GenerationConfig config;

    ModelAssets assets() const { return {&rig, nullptr, &library}; }
};

}  // namespace

TEST_CASE("sample_expression mixture") {
    Fixture fx;

    SUBCASE("p_seq = 0 with a single entry always returns it") {
        ExpressionLibrary lib;
        lib.entries.push_back(Vector::Constant(8, 0.25));
        Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            CHECK((sample_expression(lib, 0.0, rng) - lib.entries[0]).cwiseAbs().maxCoeff() == 0.0);
        }
    }

    SUBCASE("p_seq = 1 always draws a sequence keyframe") {
        Rng rng(2);
        std::set<double> sequence_keys;
        for (const Vector& v : fx.library.sequence) sequence_keys.insert(v.sum() + 1000.0 * v(0));
        for (int i = 0; i < 200; ++i) {
            const Vector v = sample_expression(fx.library, 1.0, rng);
            CHECK(sequence_keys.count(v.sum() + 1000.0 * v(0)) == 1);
        }
    }

    SUBCASE("sequence fraction matches p_seq = 0.25 over 10k draws") {
        // the library entries perturb a random component, so exact matches
        // against sequence keyframes identify the source reliably
        std::set<std::string> seq;
        for (const Vector& v : fx.library.sequence) {
            seq.insert(std::string(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)));
        }
        Rng rng(3);
        int hits = 0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) {
            const Vector v = sample_expression(fx.library, 0.25, rng);
            hits += seq.count(std::string(reinterpret_cast<const char*>(v.data()),
                                          v.size() * sizeof(double)));
        }
        const double fraction = static_cast<double>(hits) / draws;
        CHECK(fraction > 0.22);
        CHECK(fraction < 0.28);
    }

    SUBCASE("empty library is a configuration error") {
        ExpressionLibrary empty;
        Rng rng(4);
        CHECK_THROWS_AS(sample_expression(empty, 0.5, rng), Error);
    }
}

TEST_CASE("apply_gaze writes only the eye joints") {
    Fixture fx;
    PoseParams pose = PoseParams::zero(fx.rig.joint_count());
    pose.joint_rotations.row(0) << 0.11, -0.07, 0.02;
    pose.joint_rotations.row(1) << -0.04, 0.09, 0.01;

    SUBCASE("zero gaze leaves the pose unchanged") {
        const PoseParams out = apply_gaze(pose, {0.0, 0.0}, fx.rig);
        CHECK((out.joint_rotations - pose.joint_rotations).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("gaze sets both eye joints to (pitch, yaw, 0)") {
        const PoseParams out = apply_gaze(pose, {/*yaw=*/0.2, /*pitch=*/0.1}, fx.rig);
        const int l = fx.rig.joint_index("left_eye"), r = fx.rig.joint_index("right_eye");
        for (int eye : {l, r}) {
            CHECK(out.joint_rotations(eye, 0) == 0.1);
            CHECK(out.joint_rotations(eye, 1) == 0.2);
            CHECK(out.joint_rotations(eye, 2) == 0.0);
        }
        // non-eye joints bit-identical
        CHECK((out.joint_rotations.row(0) - pose.joint_rotations.row(0)).cwiseAbs().maxCoeff() == 0.0);
        CHECK((out.joint_rotations.row(1) - pose.joint_rotations.row(1)).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("rig without eye joints is a configuration error") {
        FaceRig plain = fx.rig;
        plain.joint_names = {"a", "b", "c", "d"};
        CHECK_THROWS_AS(apply_gaze(pose, {0.1, 0.1}, plain), Error);
    }
}

TEST_CASE("eyelid_pose couples pitch into designated components") {
    Vector psi = Vector::Zero(6);
    const Range clamp{-1.0, 1.0};

    SUBCASE("zero pitch is the identity") {
        psi << 0.1, -0.2, 0.3, 0.4, 0.0, 0.9;
        const Vector out = eyelid_pose(psi, {0.5, 0.0}, {{3, 1.0}}, clamp);
        CHECK((out - psi).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("single coupling adds coefficient * pitch") {
        const Vector out = eyelid_pose(psi, {0.0, 0.2}, {{3, 1.0}}, clamp);
        CHECK(out(3) == doctest::Approx(0.2).epsilon(1e-15));
        for (int i : {0, 1, 2, 4, 5}) CHECK(out(i) == 0.0);
    }

    SUBCASE("clamps to the configured range") {
        psi(3) = 0.95;
        const Vector out = eyelid_pose(psi, {0.0, 0.2}, {{3, 1.0}}, clamp);
        CHECK(out(3) == 1.0);
    }

    SUBCASE("out-of-range coupling index is rejected") {
        CHECK_THROWS_AS(eyelid_pose(psi, {0.0, 0.1}, {{17, 1.0}}, clamp), Error);
    }
}

TEST_CASE("sample_camera respects the configured shell") {
    Fixture fx;
    const Eigen::AlignedBox3d bounds = head_bounds(fx.rig);
    const Vec3 center = bounds.center();

    SUBCASE("degenerate ranges give a deterministic camera") {
        GenerationConfig cfg = fx.config;
        cfg.camera_distance_m = {0.6, 0.6};
        cfg.camera_azimuth_deg = {10.0, 10.0};
        cfg.camera_elevation_deg = {-5.0, -5.0};
        cfg.focal_mm = {50.0, 50.0};
        cfg.aperture_f = {4.0, 4.0};
        cfg.lookat_jitter = 0.0;
        Rng a(7), b(7);
        const CameraSpec ca = sample_camera(cfg, bounds, a);
        const CameraSpec cb = sample_camera(cfg, bounds, b);
        CHECK((ca.position - cb.position).norm() == 0.0);
        CHECK((ca.position - center).norm() == doctest::Approx(0.6).epsilon(1e-12));
        CHECK((ca.look_at - center).norm() == 0.0);
    }

    SUBCASE("10k samples stay within bounds and azimuth is uniform") {
        Rng rng(8);
        const int bins = 16;
        std::vector<int> histogram(bins, 0);
        const double az_lo = fx.config.camera_azimuth_deg.lo * M_PI / 180.0;
        const double az_hi = fx.config.camera_azimuth_deg.hi * M_PI / 180.0;
        const int samples = 10000;
        for (int i = 0; i < samples; ++i) {
            const CameraSpec cam = sample_camera(fx.config, bounds, rng);
            const Vec3 offset = cam.position - center;
            const double distance = offset.norm();
            CHECK(distance >= fx.config.camera_distance_m.lo - 1e-12);
            CHECK(distance <= fx.config.camera_distance_m.hi + 1e-12);
            CHECK(cam.focal_mm >= fx.config.focal_mm.lo);
            CHECK(cam.focal_mm <= fx.config.focal_mm.hi);
            CHECK(bounds.contains(cam.look_at));

            const double azimuth = std::atan2(offset.x(), offset.z());
            CHECK(azimuth >= az_lo - 1e-9);
            CHECK(azimuth <= az_hi + 1e-9);
            const double elevation = std::asin(std::clamp(offset.y() / distance, -1.0, 1.0));
            CHECK(elevation >= fx.config.camera_elevation_deg.lo * M_PI / 180.0 - 1e-9);
            CHECK(elevation <= fx.config.camera_elevation_deg.hi * M_PI / 180.0 + 1e-9);

            int bin = static_cast<int>((azimuth - az_lo) / (az_hi - az_lo) * bins);
            histogram[std::clamp(bin, 0, bins - 1)] += 1;
        }
        const double expected = static_cast<double>(samples) / bins;
        double chi2 = 0.0;
        for (int count : histogram) chi2 += (count - expected) * (count - expected) / expected;
        CHECK(chi2 < kChi2Crit15);
    }
}

TEST_CASE("assemble_scene determinism and independence") {
    Fixture fx;

    SUBCASE("same seed gives byte-identical serialized scenes") {
        const SceneDescription a = assemble_scene(fx.config, fx.assets(), 1234);
        const SceneDescription b = assemble_scene(fx.config, fx.assets(), 1234);
        CHECK(a.to_json_string() == b.to_json_string());
        const SceneDescription c = assemble_scene(fx.config, fx.assets(), 1235);
        CHECK(a.to_json_string() != c.to_json_string());
    }

    SUBCASE("scene serialization round-trips") {
        const SceneDescription a = assemble_scene(fx.config, fx.assets(), 555);
        const SceneDescription b = SceneDescription::from_json_string(a.to_json_string());
        CHECK(a.to_json_string() == b.to_json_string());
    }

    SUBCASE("toggles empty the governed slots") {
        GenerationConfig cfg = fx.config;
        cfg.hair_enabled = false;
        cfg.clothing_enabled = false;
        cfg.hair_probability = 1.0;
        cfg.outfit_probability = 1.0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const SceneDescription s = assemble_scene(cfg, fx.assets(), seed);
            CHECK(s.slots.hair_style == -1);
            CHECK(s.slots.beard == -1);
            CHECK(s.slots.outfit == -1);
            CHECK(s.slots.headwear == -1);
            CHECK(s.slots.facewear == -1);
            CHECK(s.slots.eyewear == -1);
        }
    }

    SUBCASE("changing one field's range leaves other fields untouched") {
        GenerationConfig wide = fx.config;
        wide.hair_styles = 9999;  // different hair stream consumption
        wide.hair_probability = 1.0;
        for (std::uint64_t seed = 10; seed < 30; ++seed) {
            const SceneDescription a = assemble_scene(fx.config, fx.assets(), seed);
            const SceneDescription b = assemble_scene(wide, fx.assets(), seed);
            CHECK((a.camera.position - b.camera.position).norm() == 0.0);
            CHECK(a.camera.focal_mm == b.camera.focal_mm);
            CHECK((a.identity - b.identity).cwiseAbs().maxCoeff() == 0.0);
            CHECK(a.slots.outfit == b.slots.outfit);
            CHECK(a.environment.id == b.environment.id);
        }
    }

    SUBCASE("hair and outfit ids are uncorrelated over 1000 scenes") {
        GenerationConfig cfg = fx.config;
        cfg.hair_probability = 1.0;
        cfg.outfit_probability = 1.0;
        std::vector<double> hair, outfit;
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            const SceneDescription s = assemble_scene(cfg, fx.assets(), seed);
            hair.push_back(s.slots.hair_style);
            outfit.push_back(s.slots.outfit);
        }
        const auto mean = [](const std::vector<double>& v) {
            double m = 0;
            for (double x : v) m += x;
            return m / v.size();
        };
        const double mh = mean(hair), mo = mean(outfit);
        double cov = 0, vh = 0, vo = 0;
        for (std::size_t i = 0; i < hair.size(); ++i) {
            cov += (hair[i] - mh) * (outfit[i] - mo);
            vh += (hair[i] - mh) * (hair[i] - mh);
            vo += (outfit[i] - mo) * (outfit[i] - mo);
        }
        const double r = cov / std::sqrt(vh * vo);
        // |r| * sqrt(n) below the two-sided 1% normal critical value
        CHECK(std::abs(r) * std::sqrt(static_cast<double>(hair.size())) < 2.576);
    }

    SUBCASE("gaze is layered into the stored pose and expression") {
        const SceneDescription s = assemble_scene(fx.config, fx.assets(), 77);
        const int left = fx.rig.joint_index("left_eye");
        CHECK(s.pose.joint_rotations(left, 0) == s.gaze.pitch);
        CHECK(s.pose.joint_rotations(left, 1) == s.gaze.yaw);
    }
}

TEST_CASE("attach_proxies placement contracts") {
    Fixture fx;
    GenerationConfig cfg = fx.config;

    SUBCASE("all slots empty produce no proxies") {
        SceneDescription scene = assemble_scene(cfg, fx.assets(), 1);
        scene.slots.hair_style = scene.slots.beard = scene.slots.outfit = -1;
        scene.slots.headwear = scene.slots.facewear = scene.slots.eyewear = -1;
        CHECK(attach_proxies(scene, fx.rig).empty());
    }

    SUBCASE("hair cap sits above the scalp centroid") {
        for (int style : {0, 3, 17, 511}) {
            SceneDescription scene = assemble_scene(cfg, fx.assets(), 2);
            scene.pose = PoseParams::zero(fx.rig.joint_count());  // neutral placement check
            scene.slots = AssetSlots{};
            scene.slots.hair_style = style;
            const auto proxies = attach_proxies(scene, fx.rig);
            REQUIRE(proxies.size() == 1);
            CHECK(proxies[0].face_classes[0] == SemanticClass::Hair);

            // scalp: template vertices in the upper half of the head bounds
            const Eigen::AlignedBox3d bounds = head_bounds(fx.rig);
            Vec3 centroid = Vec3::Zero();
            int count = 0;
            for (int v = 0; v < fx.rig.vertex_count(); ++v) {
                if (fx.rig.template_vertices(v, 1) > bounds.center().y()) {
                    centroid += Vec3(fx.rig.template_vertices.row(v));
                    ++count;
                }
            }
            centroid /= count;
            CHECK(proxies[0].vertices.col(1).minCoeff() > centroid.y());
        }
    }

    SUBCASE("eyewear frame straddles both eye joints") {
        SceneDescription scene = assemble_scene(cfg, fx.assets(), 3);
        scene.pose = PoseParams::zero(fx.rig.joint_count());
        scene.slots = AssetSlots{};
        scene.slots.eyewear = 4;
        const auto proxies = attach_proxies(scene, fx.rig);
        REQUIRE(proxies.size() == 1);
        Eigen::AlignedBox3d box;
        for (int v = 0; v < proxies[0].vertices.rows(); ++v) {
            box.extend(Vec3(proxies[0].vertices.row(v)));
        }
        const double tolerance = 0.01;  // rig scale: 1cm
        box.extend(box.min() - Vec3::Constant(tolerance));
        box.extend(box.max() + Vec3::Constant(tolerance));
        CHECK(box.contains(Vec3(fx.rig.template_joints.row(fx.rig.joint_index("left_eye")))));
        CHECK(box.contains(Vec3(fx.rig.template_joints.row(fx.rig.joint_index("right_eye")))));
    }

    SUBCASE("unknown proxy id is rejected") {
        SceneDescription scene = assemble_scene(cfg, fx.assets(), 4);
        scene.slots.hair_style = -7;
        CHECK_THROWS_AS(attach_proxies(scene, fx.rig), Error);
    }
}

TEST_CASE("config validation names the offending key") {
    GenerationConfig cfg;
    cfg.camera_distance_m = {0.8, 0.4};  // empty range
    try {
        cfg.validate();
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Config);
        CHECK(std::string(e.what()).find("camera.distance_m") != std::string::npos);
    }
}

TEST_CASE("config serialization round-trips") {
    GenerationConfig cfg;
    cfg.render_width = 128;
    cfg.hair_enabled = false;
    cfg.augmentation.mode = AugmentationMode::AppearanceOnly;
    const GenerationConfig back = GenerationConfig::from_json_string(cfg.to_json_string());
    CHECK(back.render_width == 128);
    CHECK(back.hair_enabled == false);
    CHECK(back.augmentation.mode == AugmentationMode::AppearanceOnly);
    CHECK(back.hash() == cfg.hash());
    CHECK(back.to_json_string() == cfg.to_json_string());

    CHECK_THROWS_AS(GenerationConfig::from_json_string("{not json"), Error);
}
