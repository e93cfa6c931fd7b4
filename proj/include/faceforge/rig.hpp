#pragma once

#include <memory>
#include <string>
#include <vector>

#include "faceforge/types.hpp"

namespace faceforge {

struct LandmarkAnchor {
    int face = 0;
    Vec3 barycentric = Vec3::Zero();
};

// Blendshape-plus-LBS face rig. Immutable after load/build; shareable
// across threads. Bases are stored flattened, one component per row of a
// (components x 3N) matrix, vertex-major [x0,y0,z0,x1,...].
struct FaceRig {
    Points template_vertices;               // N x 3
    std::shared_ptr<const Faces> faces;     // F x 3, shared with meshes
    Matrix identity_basis;                  // |beta| x 3N
    Matrix expression_basis;                // |psi| x 3N
    Matrix skinning_weights;                // K x N
    Points template_joints;                 // K x 3
    std::vector<int> joint_parents;         // parent index, root = -1
    std::vector<std::string> joint_names;   // size K
    std::vector<SemanticClass> face_regions;       // per-face class
    std::vector<LandmarkAnchor> landmark_anchors;  // 68, standard layout
    std::vector<LandmarkAnchor> dense_anchors;     // 679 or empty
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2, Eigen::RowMajor> uvs;  // N x 2, derived

    int vertex_count() const { return static_cast<int>(template_vertices.rows()); }
    int face_count() const { return faces ? static_cast<int>(faces->rows()) : 0; }
    int identity_dims() const { return static_cast<int>(identity_basis.rows()); }
    int expression_dims() const { return static_cast<int>(expression_basis.rows()); }
    int joint_count() const { return static_cast<int>(template_joints.rows()); }

    int joint_index(const std::string& name) const;  // -1 if absent

    // Throws Error(InvalidRig) naming the violated rule.
    void validate() const;

    // FNV-1a over vertex count and face indices; detects mis-registered data.
    std::uint64_t topology_hash() const;
};

struct IdentityParams {
    Vector coefficients;
};

struct ExpressionParams {
    Vector coefficients;
};

struct PoseParams {
    // K x 3 Euler angles (radians), intrinsic X-then-Y-then-Z per joint.
    Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor> joint_rotations;

    static PoseParams zero(int joint_count) {
        PoseParams p;
        p.joint_rotations.setZero(joint_count, 3);
        return p;
    }
};

struct Mesh {
    Points vertices;                     // N x 3
    Points normals;                      // N x 3, unit, area-weighted
    std::shared_ptr<const Faces> faces;  // shared rig topology
};

// Area-weighted per-vertex normals; degenerate vertices get +z.
Points vertex_normals(const Points& vertices, const Faces& faces);

std::uint64_t topology_hash(int vertex_count, const Faces& faces);

}  // namespace faceforge
