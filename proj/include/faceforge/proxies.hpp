#pragma once

#include <vector>

#include "faceforge/scene.hpp"

namespace faceforge {

// Renderable mesh with per-face class and albedo; vertices in world space.
struct SceneMesh {
    Points vertices;
    Faces faces;
    Points normals;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2, Eigen::RowMajor> uvs;  // per vertex
    std::vector<SemanticClass> face_classes;
    std::vector<Vec3> face_albedo;  // linear RGB in [0,1]
};

// Procedural stand-in geometry for the asset slots. Style ids modulate the
// proxy dimensions deterministically.
struct ProxyLibrary {
    double hair_offset = 0.012;     // shell offset above the scalp, meters
    double beard_offset = 0.009;
    double headwear_offset = 0.026;
    double facewear_offset = 0.012;
    double eyewear_lens_half = 0.026;
    double eyewear_ring_width = 0.007;
};

// Skin/feature albedo for a face-mesh face, driven by melanin and a small
// deterministic per-face variation.
Vec3 face_class_albedo(SemanticClass cls, const AssetSlots& slots, int face_index);

Vec3 hair_albedo(const AssetSlots& slots);

// The face mesh itself, posed and attributed for rasterization.
SceneMesh build_face_scene_mesh(const FaceRig& rig, const Mesh& posed, const AssetSlots& slots);

// Proxy occluders for the filled asset slots (hair cap, beard patch, torso
// wedge, headwear band, facewear cover, eyeglass frames), rigidly attached
// to the head/neck joints of the posed scene.
std::vector<SceneMesh> attach_proxies(const SceneDescription& scene, const FaceRig& rig,
                                      const ProxyLibrary& library = {});

}  // namespace faceforge
