#include "faceforge/rig.hpp"

#include <cmath>
#include <set>

#include "faceforge/rng.hpp"

namespace faceforge {

const char* semantic_class_name(SemanticClass c) {
    switch (c) {
        case SemanticClass::Background: return "background";
        case SemanticClass::Skin: return "skin";
        case SemanticClass::LeftBrow: return "left-brow";
        case SemanticClass::RightBrow: return "right-brow";
        case SemanticClass::LeftEye: return "left-eye";
        case SemanticClass::RightEye: return "right-eye";
        case SemanticClass::Nose: return "nose";
        case SemanticClass::UpperLip: return "upper-lip";
        case SemanticClass::InnerMouth: return "inner-mouth";
        case SemanticClass::LowerLip: return "lower-lip";
        case SemanticClass::Hair: return "hair";
        case SemanticClass::Clothing: return "clothing";
        case SemanticClass::Headwear: return "headwear";
        case SemanticClass::Facewear: return "facewear";
        case SemanticClass::Eyewear: return "eyewear";
    }
    return "unknown";
}

int FaceRig::joint_index(const std::string& name) const {
    for (std::size_t i = 0; i < joint_names.size(); ++i) {
        if (joint_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

void FaceRig::validate() const {
    const int n = vertex_count();
    const int k = joint_count();
    const int f = face_count();

    require(n >= 3, ErrorCode::InvalidRig, "rig has " + std::to_string(n) + " vertices (rule: N >= 3)");
    require(identity_dims() >= 1, ErrorCode::InvalidRig, "identity basis is empty (rule: |beta| >= 1)");
    require(expression_dims() >= 1, ErrorCode::InvalidRig, "expression basis is empty (rule: |psi| >= 1)");
    require(k >= 1, ErrorCode::InvalidRig, "rig has no joints (rule: K >= 1)");
    require(identity_basis.cols() == 3 * n, ErrorCode::InvalidRig,
            "identity basis has " + std::to_string(identity_basis.cols()) +
                " columns, expected 3N=" + std::to_string(3 * n) + " (rule: basis shape)");
    require(expression_basis.cols() == 3 * n, ErrorCode::InvalidRig,
            "expression basis has " + std::to_string(expression_basis.cols()) +
                " columns, expected 3N=" + std::to_string(3 * n) + " (rule: basis shape)");
    require(skinning_weights.rows() == k && skinning_weights.cols() == n, ErrorCode::InvalidRig,
            "skinning weights are " + std::to_string(skinning_weights.rows()) + "x" +
                std::to_string(skinning_weights.cols()) + ", expected KxN (rule: weight shape)");
    require(static_cast<int>(joint_parents.size()) == k, ErrorCode::InvalidRig,
            "joint parent list length mismatch (rule: parent per joint)");
    require(joint_names.empty() || static_cast<int>(joint_names.size()) == k, ErrorCode::InvalidRig,
            "joint name list length mismatch (rule: name per joint)");

    // per-vertex weight vectors: non-negative, sum to 1 within 1e-9
    for (int v = 0; v < n; ++v) {
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            const double w = skinning_weights(j, v);
            require(w >= 0.0, ErrorCode::InvalidRig,
                    "skinning weight (" + std::to_string(j) + "," + std::to_string(v) +
                        ") is negative (rule: weights >= 0)");
            sum += w;
        }
        require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::InvalidRig,
                "skinning weights of vertex " + std::to_string(v) + " sum to " +
                    std::to_string(sum) + " (rule: per-vertex weights sum to 1)");
    }

    // parents form a tree rooted at joint 0
    require(joint_parents[0] == -1, ErrorCode::InvalidRig,
            "joint 0 has parent " + std::to_string(joint_parents[0]) +
                " (rule: joint 0 is the root with parent -1)");
    for (int j = 1; j < k; ++j) {
        const int p = joint_parents[j];
        require(p >= 0 && p < k, ErrorCode::InvalidRig,
                "joint " + std::to_string(j) + " has parent " + std::to_string(p) +
                    " out of range (rule: parent indices within K)");
        // walk to root, bounded by K steps
        int cur = j;
        int steps = 0;
        while (cur != -1 && steps <= k) {
            cur = joint_parents[cur];
            ++steps;
        }
        require(steps <= k, ErrorCode::InvalidRig,
                "joint " + std::to_string(j) + " does not reach the root (rule: parents form a tree)");
    }

    require(faces != nullptr && f >= 1, ErrorCode::InvalidRig, "rig has no faces (rule: topology present)");
    for (int i = 0; i < f; ++i) {
        for (int c = 0; c < 3; ++c) {
            const int idx = (*faces)(i, c);
            require(idx >= 0 && idx < n, ErrorCode::InvalidRig,
                    "face " + std::to_string(i) + " references vertex " + std::to_string(idx) +
                        " (rule: face indices < N)");
        }
    }
    require(static_cast<int>(face_regions.size()) == f, ErrorCode::InvalidRig,
            "semantic region list length mismatch (rule: class per face)");

    auto check_anchor = [&](const LandmarkAnchor& a, const char* which) {
        require(a.face >= 0 && a.face < f, ErrorCode::InvalidRig,
                std::string(which) + " anchor references face " + std::to_string(a.face) +
                    " (rule: anchor face index < F)");
        const double s = a.barycentric.sum();
        require(a.barycentric.minCoeff() >= 0.0, ErrorCode::InvalidRig,
                std::string(which) + " anchor has a negative barycentric entry (rule: barycentric >= 0)");
        require(std::abs(s - 1.0) <= 1e-9, ErrorCode::InvalidRig,
                std::string(which) + " anchor barycentric sums to " + std::to_string(s) +
                    " (rule: barycentric sums to 1)");
    };
    require(landmark_anchors.size() == 68, ErrorCode::InvalidRig,
            "rig has " + std::to_string(landmark_anchors.size()) +
                " landmark anchors (rule: 68 sparse anchors)");
    for (const auto& a : landmark_anchors) check_anchor(a, "sparse landmark");
    require(dense_anchors.empty() || dense_anchors.size() == 679, ErrorCode::InvalidRig,
            "rig has " + std::to_string(dense_anchors.size()) +
                " dense anchors (rule: dense set is empty or 679)");
    for (const auto& a : dense_anchors) check_anchor(a, "dense landmark");

    require(template_vertices.allFinite() && identity_basis.allFinite() &&
                expression_basis.allFinite() && template_joints.allFinite(),
            ErrorCode::InvalidRig, "rig contains non-finite values (rule: finite data)");
    require(uvs.rows() == 0 || uvs.rows() == n, ErrorCode::InvalidRig,
            "uv list length mismatch (rule: uv per vertex)");
}

std::uint64_t topology_hash(int vertex_count, const Faces& faces) {
    std::uint64_t h = fnv1a64(&vertex_count, sizeof(vertex_count));
    h = fnv1a64(faces.data(), sizeof(int) * faces.size(), h);
    return h;
}

std::uint64_t FaceRig::topology_hash() const {
    return faceforge::topology_hash(vertex_count(), *faces);
}

Points vertex_normals(const Points& vertices, const Faces& faces) {
    Points normals = Points::Zero(vertices.rows(), 3);
    for (int i = 0; i < faces.rows(); ++i) {
        const Vec3 a = vertices.row(faces(i, 0));
        const Vec3 b = vertices.row(faces(i, 1));
        const Vec3 c = vertices.row(faces(i, 2));
        const Vec3 fn = (b - a).cross(c - a);  // area-weighted
        for (int k = 0; k < 3; ++k) normals.row(faces(i, k)) += fn.transpose();
    }
    for (int v = 0; v < normals.rows(); ++v) {
        const double len = normals.row(v).norm();
        if (len > 1e-20) {
            normals.row(v) /= len;
        } else {
            normals.row(v) = Eigen::RowVector3d(0, 0, 1);
        }
    }
    return normals;
}

}  // namespace faceforge
