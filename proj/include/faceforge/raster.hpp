#pragma once

#include <limits>
#include <vector>

#include "faceforge/proxies.hpp"

namespace faceforge {

// Pinhole camera, continuous image coordinates. The image spans
// [0,W]x[0,H] with pixel (c,r) centered at (c+0.5, r+0.5) and the origin at
// the top-left corner; +y in camera space maps upward in the scene, so the
// projection flips it into row coordinates. Depth is camera-space z.
struct Camera {
    Transform extrinsics = Transform::Identity();  // world -> camera, +z forward
    double focal_px = 100.0;
    Vec2 principal = Vec2(32.0, 32.0);
    int width = 64;
    int height = 64;
};

Camera make_camera(const CameraSpec& spec, int width, int height);

// (u, v, depth); depth <= 0 marks a point behind the camera.
Vec3 project(const Camera& camera, const Vec3& world_point);
std::vector<Vec3> project(const Camera& camera, const std::vector<Vec3>& world_points);

struct Landmark {
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;
    bool visible = false;
};

struct RasterDiagnostics {
    int degenerate_triangles = 0;
    int clipped_triangles = 0;
};

constexpr double kDepthBackground = std::numeric_limits<double>::infinity();

// Per-pixel ground-truth layers plus projected landmarks for one image.
struct LabelBundle {
    int width = 0;
    int height = 0;
    std::vector<float> color;        // 3*W*H rgb in [0,1]
    std::vector<float> albedo;       // 3*W*H
    std::vector<std::uint8_t> mask;  // W*H class ids
    std::vector<double> depth;       // W*H camera z, +inf background
    std::vector<float> normals;      // 3*W*H unit vectors, zero background
    std::vector<float> uvs;          // 2*W*H in [0,1]^2
    std::vector<float> vertex_map;   // 3*W*H model-space surface position
    std::vector<std::int32_t> triangle_id;  // W*H winning triangle, -1 background
    std::vector<Landmark> landmarks;        // 68
    std::vector<Landmark> dense_landmarks;  // 679 when enabled
    RasterDiagnostics diagnostics;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Z-buffered triangle rasterization with perspective-correct attribute
// interpolation. A pixel is covered when its center lies inside the
// projected triangle (edge-inclusive); depth ties keep the lowest triangle
// index. Fills every layer except color.
LabelBundle rasterize(const std::vector<SceneMesh>& meshes, const Camera& camera);

// Lambertian + ambient: color = albedo * (ambient + max(0, n.l) * (1-ambient)).
// light_to is the unit vector pointing toward the light. Background pixels
// take the supplied background color.
void shade_color(LabelBundle& bundle, const Vec3& light_to, double ambient,
                 const Vec3& background = Vec3::Zero());

// Anchor positions from the posed face mesh projected into the image. An
// anchor is visible iff it lands in-frame on a covered pixel and its depth
// is within tolerance of the rendered depth there.
std::vector<Landmark> extract_landmarks(const Points& posed_vertices, const Faces& faces,
                                        const std::vector<LandmarkAnchor>& anchors,
                                        const Camera& camera, const LabelBundle& bundle,
                                        double depth_tolerance);

// Analytic light rig standing in for the environment slot.
Vec3 environment_light_direction(const EnvironmentSpec& env);
double environment_ambient(const EnvironmentSpec& env);
Vec3 environment_background(const EnvironmentSpec& env);

// Full per-image entry point: pose, attach proxies, rasterize, shade, and
// extract landmarks. Deterministic given (scene, rig, config).
LabelBundle render_scene(const SceneDescription& scene, const FaceRig& rig,
                         const GenerationConfig& config);

}  // namespace faceforge
