#include "faceforge/proxies.hpp"

#include <cmath>

#include "faceforge/face_model.hpp"

namespace faceforge {

namespace {

double hash01(std::uint64_t key) {
    return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

// ±variation, deterministic in (slot id, tag)
double style_jitter(int id, std::string_view tag, double variation) {
    return variation * (2.0 * hash01(derive_seed(static_cast<std::uint64_t>(id), tag)) - 1.0);
}

Vec3 mix(const Vec3& a, const Vec3& b, double t) { return a + t * (b - a); }

struct MeshBuilder {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    int add_vertex(const Vec3& p) {
        vertices.push_back(p);
        return static_cast<int>(vertices.size()) - 1;
    }

    void add_face(int a, int b, int c) { faces.push_back({a, b, c}); }

    void add_quad(int a, int b, int c, int d) {
        add_face(a, b, c);
        add_face(a, c, d);
    }

    SceneMesh finish(SemanticClass cls, const Vec3& albedo, const Transform& attach) const {
        SceneMesh mesh;
        mesh.vertices.resize(static_cast<int>(vertices.size()), 3);
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            mesh.vertices.row(static_cast<int>(i)) = (attach * vertices[i]).transpose();
        }
        mesh.faces.resize(static_cast<int>(faces.size()), 3);
        for (std::size_t i = 0; i < faces.size(); ++i) {
            mesh.faces.row(static_cast<int>(i)) << faces[i][0], faces[i][1], faces[i][2];
        }
        mesh.normals = vertex_normals(mesh.vertices, mesh.faces);
        mesh.uvs.setZero(mesh.vertices.rows(), 2);
        mesh.face_classes.assign(faces.size(), cls);
        mesh.face_albedo.resize(faces.size());
        for (std::size_t i = 0; i < faces.size(); ++i) {
            const double v = 1.0 + 0.08 * (hash01(i * 2654435761u + 17) - 0.5);
            mesh.face_albedo[i] = (albedo * v).cwiseMax(0.0).cwiseMin(1.0);
        }
        return mesh;
    }
};

// Shell patch: rig surface vertices inside an elevation/azimuth window,
// displaced outward from the head centroid. Follows any head shape.
MeshBuilder shell_patch(const FaceRig& rig, double min_elevation, double max_elevation,
                        double max_abs_azimuth, double offset) {
    const Vec3 center = head_bounds(rig).center();
    std::vector<int> remap(rig.vertex_count(), -1);
    MeshBuilder b;
    const Faces& faces = *rig.faces;
    for (int i = 0; i < faces.rows(); ++i) {
        bool keep = true;
        for (int c = 0; c < 3 && keep; ++c) {
            const Vec3 p = Vec3(rig.template_vertices.row(faces(i, c))) - center;
            const double r = p.norm();
            const double el = std::asin(std::clamp(p.y() / std::max(r, 1e-12), -1.0, 1.0));
            const double az = std::atan2(p.x(), p.z());
            keep = el >= min_elevation && el <= max_elevation && std::abs(az) <= max_abs_azimuth;
        }
        if (!keep) continue;
        int idx[3];
        for (int c = 0; c < 3; ++c) {
            const int v = faces(i, c);
            if (remap[v] == -1) {
                const Vec3 p = Vec3(rig.template_vertices.row(v)) - center;
                remap[v] = b.add_vertex(center + p + offset * p.normalized());
            }
            idx[c] = remap[v];
        }
        b.add_face(idx[0], idx[1], idx[2]);
    }
    return b;
}

MeshBuilder torso_wedge(int outfit_id) {
    const double half_w = 0.24 + style_jitter(outfit_id, "torso-width", 0.03);
    const double top_w = half_w * 0.82;
    const double half_d = 0.13 + style_jitter(outfit_id, "torso-depth", 0.015);
    const double y_top = -0.125;
    const double y_bottom = -0.42;

    MeshBuilder b;
    // trapezoidal prism: narrower at the shoulders
    const int v0 = b.add_vertex({-top_w, y_top, half_d});
    const int v1 = b.add_vertex({top_w, y_top, half_d});
    const int v2 = b.add_vertex({top_w, y_top, -half_d});
    const int v3 = b.add_vertex({-top_w, y_top, -half_d});
    const int v4 = b.add_vertex({-half_w, y_bottom, half_d * 1.15});
    const int v5 = b.add_vertex({half_w, y_bottom, half_d * 1.15});
    const int v6 = b.add_vertex({half_w, y_bottom, -half_d * 1.15});
    const int v7 = b.add_vertex({-half_w, y_bottom, -half_d * 1.15});
    b.add_quad(v0, v1, v5, v4);  // front
    b.add_quad(v2, v3, v7, v6);  // back
    b.add_quad(v1, v2, v6, v5);  // +x side
    b.add_quad(v3, v0, v4, v7);  // -x side
    b.add_quad(v3, v2, v1, v0);  // top
    b.add_quad(v4, v5, v6, v7);  // bottom
    return b;
}

void add_ring(MeshBuilder& b, const Vec3& center, double outer, double inner, double z) {
    // flat square annulus made of four trapezoid quads
    const Vec3 o[4] = {center + Vec3(-outer, outer, z), center + Vec3(outer, outer, z),
                       center + Vec3(outer, -outer, z), center + Vec3(-outer, -outer, z)};
    const Vec3 in[4] = {center + Vec3(-inner, inner, z), center + Vec3(inner, inner, z),
                        center + Vec3(inner, -inner, z), center + Vec3(-inner, -inner, z)};
    int oi[4], ii[4];
    for (int i = 0; i < 4; ++i) {
        oi[i] = b.add_vertex(o[i]);
        ii[i] = b.add_vertex(in[i]);
    }
    for (int i = 0; i < 4; ++i) {
        const int j = (i + 1) % 4;
        b.add_quad(oi[i], oi[j], ii[j], ii[i]);
    }
}

MeshBuilder eyeglasses(const FaceRig& rig, const ProxyLibrary& lib, int id) {
    const Vec3 left = rig.template_joints.row(rig.joint_index("left_eye"));
    const Vec3 right = rig.template_joints.row(rig.joint_index("right_eye"));
    const double lens = lib.eyewear_lens_half + style_jitter(id, "lens", 0.004);
    const double ring = lib.eyewear_ring_width;
    const double z_front = std::max(left.z(), right.z()) + 0.030;

    MeshBuilder b;
    add_ring(b, Vec3(left.x(), left.y(), 0.0), lens, lens - ring, z_front);
    add_ring(b, Vec3(right.x(), right.y(), 0.0), lens, lens - ring, z_front);
    // nose bridge
    const double bridge_y = 0.5 * (left.y() + right.y()) + 0.2 * lens;
    const int b0 = b.add_vertex({left.x() + lens - ring, bridge_y + ring, z_front});
    const int b1 = b.add_vertex({right.x() - lens + ring, bridge_y + ring, z_front});
    const int b2 = b.add_vertex({right.x() - lens + ring, bridge_y - ring, z_front});
    const int b3 = b.add_vertex({left.x() + lens - ring, bridge_y - ring, z_front});
    b.add_quad(b0, b1, b2, b3);
    // temple bars back toward the ears
    for (int side = 0; side < 2; ++side) {
        const Vec3 eye = side == 0 ? left : right;
        const double sx = side == 0 ? -1.0 : 1.0;
        const double x = eye.x() + sx * lens;
        const int t0 = b.add_vertex({x, eye.y() + ring, z_front});
        const int t1 = b.add_vertex({x + sx * 0.035, eye.y() + ring, z_front - 0.085});
        const int t2 = b.add_vertex({x + sx * 0.035, eye.y() - ring, z_front - 0.085});
        const int t3 = b.add_vertex({x, eye.y() - ring, z_front});
        b.add_quad(t0, t1, t2, t3);
    }
    return b;
}

Vec3 clothing_albedo(std::string_view tag, int id) {
    // muted palette, deterministic per style id
    const double hue = hash01(derive_seed(static_cast<std::uint64_t>(id), tag));
    const double h6 = hue * 6.0;
    const double s = 0.45, v = 0.55;
    const double c = v * s;
    const double x = c * (1.0 - std::abs(std::fmod(h6, 2.0) - 1.0));
    Vec3 rgb;
    if (h6 < 1) rgb = {c, x, 0};
    else if (h6 < 2) rgb = {x, c, 0};
    else if (h6 < 3) rgb = {0, c, x};
    else if (h6 < 4) rgb = {0, x, c};
    else if (h6 < 5) rgb = {x, 0, c};
    else rgb = {c, 0, x};
    return rgb + Vec3::Constant(v - c);
}

}  // namespace

Vec3 hair_albedo(const AssetSlots& slots) {
    const Vec3 dark(0.06, 0.04, 0.03);
    const Vec3 light(0.45, 0.30, 0.16);
    const Vec3 gray(0.66, 0.66, 0.64);
    return mix(mix(light, dark, slots.melanin), gray, slots.grayness);
}

Vec3 face_class_albedo(SemanticClass cls, const AssetSlots& slots, int face_index) {
    const Vec3 skin_light(0.85, 0.66, 0.55);
    const Vec3 skin_dark(0.36, 0.24, 0.17);
    const Vec3 skin = mix(skin_light, skin_dark, std::pow(slots.melanin, 0.85));

    Vec3 base = skin;
    switch (cls) {
        case SemanticClass::LeftBrow:
        case SemanticClass::RightBrow:
            base = mix(hair_albedo(slots), skin, 0.25);
            break;
        case SemanticClass::LeftEye:
        case SemanticClass::RightEye:
            base = Vec3(0.72, 0.72, 0.75);
            break;
        case SemanticClass::UpperLip:
        case SemanticClass::LowerLip:
            base = Vec3(skin.x() * 1.08, skin.y() * 0.72, skin.z() * 0.72);
            break;
        case SemanticClass::InnerMouth:
            base = Vec3(0.32, 0.12, 0.12);
            break;
        default:
            break;
    }
    const double v = 1.0 + 0.05 * (hash01(static_cast<std::uint64_t>(face_index) * 911 + 5) - 0.5);
    return (base * v).cwiseMax(0.0).cwiseMin(1.0);
}

SceneMesh build_face_scene_mesh(const FaceRig& rig, const Mesh& posed, const AssetSlots& slots) {
    SceneMesh mesh;
    mesh.vertices = posed.vertices;
    mesh.faces = *rig.faces;
    mesh.normals = posed.normals;
    mesh.uvs = rig.uvs;
    if (mesh.uvs.rows() == 0) mesh.uvs.setZero(mesh.vertices.rows(), 2);
    mesh.face_classes = rig.face_regions;
    mesh.face_albedo.resize(rig.face_count());
    for (int i = 0; i < rig.face_count(); ++i) {
        mesh.face_albedo[i] = face_class_albedo(rig.face_regions[i], slots, i);
    }
    return mesh;
}

std::vector<SceneMesh> attach_proxies(const SceneDescription& scene, const FaceRig& rig,
                                      const ProxyLibrary& library) {
    auto check_slot = [](int id, int lo_ok, const char* name) {
        require(id >= lo_ok, ErrorCode::Config,
                std::string("unknown ") + name + " proxy id " + std::to_string(id));
    };
    check_slot(scene.slots.hair_style, -1, "hair");
    check_slot(scene.slots.beard, -1, "beard");
    check_slot(scene.slots.outfit, -1, "outfit");
    check_slot(scene.slots.headwear, -1, "headwear");
    check_slot(scene.slots.facewear, -1, "facewear");
    check_slot(scene.slots.eyewear, -1, "eyewear");

    const Points joints = joint_locations(rig, {scene.identity});
    const std::vector<Transform> global = forward_kinematics(rig, scene.pose, joints);
    const int head = rig.joint_index("head");
    const int neck = rig.joint_index("neck");
    const Transform head_t = head >= 0 ? global[head] : Transform::Identity();
    const Transform neck_t = neck >= 0 ? global[neck] : global[0];

    std::vector<SceneMesh> proxies;

    if (scene.slots.hair_style >= 0) {
        // crown cap: the rim must stay above the scalp centroid
        const double cut = 0.72 + style_jitter(scene.slots.hair_style, "hair-cut", 0.06);
        const double offset =
            library.hair_offset * (1.0 + 0.5 * hash01(scene.slots.hair_style * 31 + 7));
        MeshBuilder cap = shell_patch(rig, cut, M_PI / 2, M_PI, offset);
        proxies.push_back(cap.finish(SemanticClass::Hair, hair_albedo(scene.slots), head_t));
    }

    if (scene.slots.beard >= 0) {
        const double top = -0.38 + style_jitter(scene.slots.beard, "beard-top", 0.06);
        MeshBuilder patch = shell_patch(rig, -1.05, top, 0.85, library.beard_offset);
        proxies.push_back(patch.finish(SemanticClass::Hair, hair_albedo(scene.slots) * 0.9, head_t));
    }

    if (scene.slots.outfit >= 0) {
        MeshBuilder torso = torso_wedge(scene.slots.outfit);
        proxies.push_back(torso.finish(SemanticClass::Clothing,
                                       clothing_albedo("outfit", scene.slots.outfit), neck_t));
    }

    if (scene.slots.headwear >= 0) {
        const double cut = 0.55 + style_jitter(scene.slots.headwear, "brim", 0.08);
        MeshBuilder band = shell_patch(rig, cut, M_PI / 2, M_PI, library.headwear_offset);
        proxies.push_back(band.finish(SemanticClass::Headwear,
                                      clothing_albedo("headwear", scene.slots.headwear), head_t));
    }

    if (scene.slots.facewear >= 0) {
        MeshBuilder cover = shell_patch(rig, -0.95, -0.05, 0.95, library.facewear_offset);
        proxies.push_back(cover.finish(SemanticClass::Facewear,
                                       clothing_albedo("facewear", scene.slots.facewear), head_t));
    }

    if (scene.slots.eyewear >= 0) {
        require(rig.joint_index("left_eye") >= 0 && rig.joint_index("right_eye") >= 0,
                ErrorCode::Config, "eyewear proxy needs eye joints");
        MeshBuilder frames = eyeglasses(rig, library, scene.slots.eyewear);
        proxies.push_back(frames.finish(SemanticClass::Eyewear, Vec3(0.08, 0.08, 0.09), head_t));
    }

    return proxies;
}

}  // namespace faceforge
