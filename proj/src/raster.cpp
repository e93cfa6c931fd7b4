#include "faceforge/raster.hpp"

#include <algorithm>
#include <cmath>

#include "faceforge/face_model.hpp"

namespace faceforge {

namespace {

constexpr double kNearPlane = 1e-6;

Vec3 world_up_for(const Vec3& forward) {
    return std::abs(forward.y()) > 0.999 ? Vec3(0, 0, 1) : Vec3(0, 1, 0);
}

}  // namespace

Camera make_camera(const CameraSpec& spec, int width, int height) {
    require(width >= 16 && height >= 16, ErrorCode::InvalidParameter,
            "camera resolution must be at least 16x16");
    require(spec.focal_mm > 0.0, ErrorCode::InvalidParameter, "focal length must be positive");
    require((spec.look_at - spec.position).norm() > 1e-9, ErrorCode::InvalidParameter,
            "camera position and look-at coincide");

    const Vec3 forward = (spec.look_at - spec.position).normalized();
    const Vec3 up_hint = world_up_for(forward);
    const Vec3 right = up_hint.cross(forward).normalized();
    const Vec3 up = forward.cross(right);

    Mat3 rotation;  // rows: camera axes in world coordinates
    rotation.row(0) = right.transpose();
    rotation.row(1) = up.transpose();
    rotation.row(2) = forward.transpose();

    Camera cam;
    cam.extrinsics = Transform::Identity();
    cam.extrinsics.linear() = rotation;
    cam.extrinsics.translation() = -rotation * spec.position;
    // 36mm-equivalent focal length scaled onto the sensor width in pixels
    cam.focal_px = spec.focal_mm / 36.0 * width;
    cam.principal = Vec2(width / 2.0, height / 2.0);
    cam.width = width;
    cam.height = height;
    return cam;
}

Vec3 project(const Camera& camera, const Vec3& world_point) {
    require(world_point.allFinite(), ErrorCode::InvalidParameter, "cannot project non-finite point");
    const Vec3 p = camera.extrinsics * world_point;
    const double z = p.z();
    if (std::abs(z) < kNearPlane) {
        return {camera.principal.x(), camera.principal.y(), z};
    }
    // y points up in camera space, rows grow downward
    return {camera.principal.x() + camera.focal_px * p.x() / z,
            camera.principal.y() - camera.focal_px * p.y() / z, z};
}

std::vector<Vec3> project(const Camera& camera, const std::vector<Vec3>& world_points) {
    std::vector<Vec3> out;
    out.reserve(world_points.size());
    for (const Vec3& p : world_points) out.push_back(project(camera, p));
    return out;
}

LabelBundle rasterize(const std::vector<SceneMesh>& meshes, const Camera& camera) {
    const int w = camera.width, h = camera.height;
    LabelBundle bundle;
    bundle.width = w;
    bundle.height = h;
    const std::size_t pixels = bundle.pixel_count();
    bundle.albedo.assign(3 * pixels, 0.0f);
    bundle.mask.assign(pixels, static_cast<std::uint8_t>(SemanticClass::Background));
    bundle.depth.assign(pixels, kDepthBackground);
    bundle.normals.assign(3 * pixels, 0.0f);
    bundle.uvs.assign(2 * pixels, 0.0f);
    bundle.vertex_map.assign(3 * pixels, 0.0f);
    bundle.triangle_id.assign(pixels, -1);

    int global_triangle = 0;
    for (const SceneMesh& mesh : meshes) {
        require(static_cast<int>(mesh.face_classes.size()) == mesh.faces.rows() &&
                    static_cast<int>(mesh.face_albedo.size()) == mesh.faces.rows(),
                ErrorCode::InvalidParameter, "mesh per-face attributes do not match topology");

        // camera-space and screen-space vertices once per mesh
        const int nv = static_cast<int>(mesh.vertices.rows());
        Points cam_pts(nv, 3);
        std::vector<Vec2> screen(nv);
        for (int v = 0; v < nv; ++v) {
            const Vec3 p = camera.extrinsics * Vec3(mesh.vertices.row(v));
            cam_pts.row(v) = p.transpose();
            if (p.z() > kNearPlane) {
                screen[v] = {camera.principal.x() + camera.focal_px * p.x() / p.z(),
                             camera.principal.y() - camera.focal_px * p.y() / p.z()};
            }
        }

        for (int t = 0; t < mesh.faces.rows(); ++t, ++global_triangle) {
            const int i0 = mesh.faces(t, 0), i1 = mesh.faces(t, 1), i2 = mesh.faces(t, 2);
            const double z0 = cam_pts(i0, 2), z1 = cam_pts(i1, 2), z2 = cam_pts(i2, 2);
            if (z0 <= kNearPlane || z1 <= kNearPlane || z2 <= kNearPlane) {
                // no near-plane clipping; scenes keep subjects in front
                ++bundle.diagnostics.clipped_triangles;
                continue;
            }
            const Vec2 p0 = screen[i0], p1 = screen[i1], p2 = screen[i2];
            const double area2 =
                (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x());
            if (std::abs(area2) < 1e-14) {
                ++bundle.diagnostics.degenerate_triangles;
                continue;
            }
            const double orient = area2 > 0.0 ? 1.0 : -1.0;

            const double min_x = std::min({p0.x(), p1.x(), p2.x()});
            const double max_x = std::max({p0.x(), p1.x(), p2.x()});
            const double min_y = std::min({p0.y(), p1.y(), p2.y()});
            const double max_y = std::max({p0.y(), p1.y(), p2.y()});
            // pixel centers at (c + 0.5, r + 0.5)
            const int c_lo = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
            const int c_hi = std::min(w - 1, static_cast<int>(std::floor(max_x - 0.5)));
            const int r_lo = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
            const int r_hi = std::min(h - 1, static_cast<int>(std::floor(max_y - 0.5)));
            if (c_lo > c_hi || r_lo > r_hi) continue;

            const double inv_z0 = 1.0 / z0, inv_z1 = 1.0 / z1, inv_z2 = 1.0 / z2;
            const double inv_area = orient / area2;

            for (int r = r_lo; r <= r_hi; ++r) {
                const double qy = r + 0.5;
                for (int c = c_lo; c <= c_hi; ++c) {
                    const double qx = c + 0.5;
                    const double e0 = orient * ((p2.x() - p1.x()) * (qy - p1.y()) -
                                                (p2.y() - p1.y()) * (qx - p1.x()));
                    const double e1 = orient * ((p0.x() - p2.x()) * (qy - p2.y()) -
                                                (p0.y() - p2.y()) * (qx - p2.x()));
                    const double e2 = orient * ((p1.x() - p0.x()) * (qy - p0.y()) -
                                                (p1.y() - p0.y()) * (qx - p0.x()));
                    if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) continue;

                    const double l0 = e0 * inv_area;
                    const double l1 = e1 * inv_area;
                    const double l2 = e2 * inv_area;
                    const double inv_z = l0 * inv_z0 + l1 * inv_z1 + l2 * inv_z2;
                    const double z = 1.0 / inv_z;

                    const std::size_t idx = static_cast<std::size_t>(r) * w + c;
                    if (z >= bundle.depth[idx]) continue;  // strict: first (lowest) index wins ties

                    // perspective-correct weights
                    const double w0 = l0 * inv_z0 / inv_z;
                    const double w1 = l1 * inv_z1 / inv_z;
                    const double w2 = l2 * inv_z2 / inv_z;

                    bundle.depth[idx] = z;
                    bundle.triangle_id[idx] = global_triangle;
                    bundle.mask[idx] = static_cast<std::uint8_t>(mesh.face_classes[t]);

                    const Vec3 albedo = mesh.face_albedo[t];
                    bundle.albedo[3 * idx] = static_cast<float>(albedo.x());
                    bundle.albedo[3 * idx + 1] = static_cast<float>(albedo.y());
                    bundle.albedo[3 * idx + 2] = static_cast<float>(albedo.z());

                    Vec3 normal = w0 * Vec3(mesh.normals.row(i0)) + w1 * Vec3(mesh.normals.row(i1)) +
                                  w2 * Vec3(mesh.normals.row(i2));
                    const double len = normal.norm();
                    normal = len > 1e-12 ? Vec3(normal / len) : Vec3(0, 0, 1);
                    bundle.normals[3 * idx] = static_cast<float>(normal.x());
                    bundle.normals[3 * idx + 1] = static_cast<float>(normal.y());
                    bundle.normals[3 * idx + 2] = static_cast<float>(normal.z());

                    const double u = w0 * mesh.uvs(i0, 0) + w1 * mesh.uvs(i1, 0) + w2 * mesh.uvs(i2, 0);
                    const double v = w0 * mesh.uvs(i0, 1) + w1 * mesh.uvs(i1, 1) + w2 * mesh.uvs(i2, 1);
                    bundle.uvs[2 * idx] = static_cast<float>(std::clamp(u, 0.0, 1.0));
                    bundle.uvs[2 * idx + 1] = static_cast<float>(std::clamp(v, 0.0, 1.0));

                    const Vec3 pos = w0 * Vec3(mesh.vertices.row(i0)) +
                                     w1 * Vec3(mesh.vertices.row(i1)) +
                                     w2 * Vec3(mesh.vertices.row(i2));
                    bundle.vertex_map[3 * idx] = static_cast<float>(pos.x());
                    bundle.vertex_map[3 * idx + 1] = static_cast<float>(pos.y());
                    bundle.vertex_map[3 * idx + 2] = static_cast<float>(pos.z());
                }
            }
        }
    }
    return bundle;
}

void shade_color(LabelBundle& bundle, const Vec3& light_to, double ambient,
                 const Vec3& background) {
    require(!bundle.normals.empty(), ErrorCode::InvalidParameter,
            "shade_color needs a populated normals layer");
    const Vec3 light = light_to.normalized();
    const double amb = std::clamp(ambient, 0.0, 1.0);
    bundle.color.assign(3 * bundle.pixel_count(), 0.0f);
    for (std::size_t i = 0; i < bundle.pixel_count(); ++i) {
        if (bundle.mask[i] == static_cast<std::uint8_t>(SemanticClass::Background)) {
            bundle.color[3 * i] = static_cast<float>(background.x());
            bundle.color[3 * i + 1] = static_cast<float>(background.y());
            bundle.color[3 * i + 2] = static_cast<float>(background.z());
            continue;
        }
        const Vec3 n(bundle.normals[3 * i], bundle.normals[3 * i + 1], bundle.normals[3 * i + 2]);
        const double shade = amb + std::max(0.0, n.dot(light)) * (1.0 - amb);
        for (int c = 0; c < 3; ++c) {
            bundle.color[3 * i + c] =
                static_cast<float>(std::clamp(bundle.albedo[3 * i + c] * shade, 0.0, 1.0));
        }
    }
}

std::vector<Landmark> extract_landmarks(const Points& posed_vertices, const Faces& faces,
                                        const std::vector<LandmarkAnchor>& anchors,
                                        const Camera& camera, const LabelBundle& bundle,
                                        double depth_tolerance) {
    require(!bundle.depth.empty(), ErrorCode::InvalidParameter,
            "extract_landmarks needs a rendered depth layer");
    std::vector<Landmark> out;
    out.reserve(anchors.size());
    for (const LandmarkAnchor& anchor : anchors) {
        require(anchor.face >= 0 && anchor.face < faces.rows(), ErrorCode::InvalidParameter,
                "landmark anchor face index out of range");
        const Vec3 pos = anchor.barycentric.x() * Vec3(posed_vertices.row(faces(anchor.face, 0))) +
                         anchor.barycentric.y() * Vec3(posed_vertices.row(faces(anchor.face, 1))) +
                         anchor.barycentric.z() * Vec3(posed_vertices.row(faces(anchor.face, 2)));
        const Vec3 projected = project(camera, pos);

        Landmark lm;
        lm.x = projected.x();
        lm.y = projected.y();
        lm.depth = projected.z();
        lm.visible = false;
        if (projected.z() > 0.0 && projected.x() >= 0.0 && projected.x() < camera.width &&
            projected.y() >= 0.0 && projected.y() < camera.height) {
            const int c = std::min(camera.width - 1, static_cast<int>(projected.x()));
            const int r = std::min(camera.height - 1, static_cast<int>(projected.y()));
            const double rendered = bundle.depth[static_cast<std::size_t>(r) * camera.width + c];
            // background pixels mean the anchor grazed the silhouette; treat
            // as not visible so visible landmarks always lie on geometry
            lm.visible = std::isfinite(rendered) && projected.z() <= rendered + depth_tolerance;
        }
        out.push_back(lm);
    }
    return out;
}

Vec3 environment_light_direction(const EnvironmentSpec& env) {
    const double h1 = static_cast<double>(splitmix64(env.id * 2 + 1) >> 11) * 0x1.0p-53;
    const double h2 = static_cast<double>(splitmix64(env.id * 2 + 2) >> 11) * 0x1.0p-53;
    const double azimuth = 2.0 * M_PI * h1 + env.rotation;
    const double elevation = (0.25 + 0.85 * h2);  // radians above horizon
    return {std::cos(elevation) * std::sin(azimuth), std::sin(elevation),
            std::cos(elevation) * std::cos(azimuth)};
}

double environment_ambient(const EnvironmentSpec& env) {
    return std::clamp(0.15 + 0.5 * env.intensity, 0.0, 1.0);
}

Vec3 environment_background(const EnvironmentSpec& env) {
    const double h = static_cast<double>(splitmix64(env.id * 7 + 3) >> 11) * 0x1.0p-53;
    const Vec3 cool(0.35, 0.42, 0.52);
    const Vec3 warm(0.55, 0.47, 0.38);
    return (cool + h * (warm - cool)) * std::clamp(0.35 + 0.65 * env.intensity, 0.0, 1.0);
}

namespace {

LabelBundle render_layers(const SceneDescription& scene, const FaceRig& rig, const Mesh& posed,
                          const Camera& camera) {
    std::vector<SceneMesh> meshes;
    meshes.push_back(build_face_scene_mesh(rig, posed, scene.slots));
    std::vector<SceneMesh> proxies = attach_proxies(scene, rig);
    for (auto& p : proxies) meshes.push_back(std::move(p));

    LabelBundle bundle = rasterize(meshes, camera);
    shade_color(bundle, environment_light_direction(scene.environment),
                environment_ambient(scene.environment), environment_background(scene.environment));
    return bundle;
}

}  // namespace

LabelBundle render_scene(const SceneDescription& scene, const FaceRig& rig,
                         const GenerationConfig& config) {
    require(scene.identity.size() == rig.identity_dims() &&
                scene.expression.size() == rig.expression_dims() &&
                scene.pose.joint_rotations.rows() == rig.joint_count(),
            ErrorCode::InvalidParameter, "scene parameters do not match the rig");

    const Mesh posed = posed_mesh(rig, {scene.identity}, {scene.expression}, scene.pose);
    const Camera camera = make_camera(scene.camera, config.render_width, config.render_height);
    LabelBundle bundle = render_layers(scene, rig, posed, camera);

    if (config.color_supersample) {
        // color only: render at 2x and box-filter; label layers stay crisp
        const Camera camera2 = make_camera(scene.camera, 2 * config.render_width, 2 * config.render_height);
        const LabelBundle fine = render_layers(scene, rig, posed, camera2);
        for (int r = 0; r < bundle.height; ++r) {
            for (int c = 0; c < bundle.width; ++c) {
                for (int ch = 0; ch < 3; ++ch) {
                    float acc = 0.0f;
                    for (int dr = 0; dr < 2; ++dr)
                        for (int dc = 0; dc < 2; ++dc)
                            acc += fine.color[3 * ((2 * r + dr) * static_cast<std::size_t>(fine.width) +
                                                   (2 * c + dc)) + ch];
                    bundle.color[3 * (r * static_cast<std::size_t>(bundle.width) + c) + ch] = acc / 4.0f;
                }
            }
        }
    }

    bundle.landmarks = extract_landmarks(posed.vertices, *rig.faces, rig.landmark_anchors, camera,
                                         bundle, config.landmark_depth_tolerance);
    if (config.dense_landmarks && !rig.dense_anchors.empty()) {
        bundle.dense_landmarks = extract_landmarks(posed.vertices, *rig.faces, rig.dense_anchors,
                                                   camera, bundle, config.landmark_depth_tolerance);
    }
    return bundle;
}

}  // namespace faceforge
