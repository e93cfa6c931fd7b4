#include "faceforge/face_model.hpp"

namespace faceforge {

Mat3 euler_to_rotation(const Vec3& angles) {
    require(angles.allFinite(), ErrorCode::InvalidParameter, "euler angles must be finite");
    return (Eigen::AngleAxisd(angles.x(), Vec3::UnitX()) *
            Eigen::AngleAxisd(angles.y(), Vec3::UnitY()) *
            Eigen::AngleAxisd(angles.z(), Vec3::UnitZ()))
        .toRotationMatrix();
}

Mesh bind_pose_mesh(const FaceRig& rig, const IdentityParams& beta, const ExpressionParams& psi) {
    require(beta.coefficients.size() == rig.identity_dims(), ErrorCode::InvalidParameter,
            "identity parameter length " + std::to_string(beta.coefficients.size()) +
                " does not match rig |beta|=" + std::to_string(rig.identity_dims()));
    require(psi.coefficients.size() == rig.expression_dims(), ErrorCode::InvalidParameter,
            "expression parameter length " + std::to_string(psi.coefficients.size()) +
                " does not match rig |psi|=" + std::to_string(rig.expression_dims()));
    require(beta.coefficients.allFinite() && psi.coefficients.allFinite(),
            ErrorCode::InvalidParameter, "face model parameters must be finite");

    const int n = rig.vertex_count();
    Vector flat = Eigen::Map<const Vector>(rig.template_vertices.data(), 3 * n);
    flat.noalias() += rig.identity_basis.transpose() * beta.coefficients;
    flat.noalias() += rig.expression_basis.transpose() * psi.coefficients;

    Mesh mesh;
    mesh.vertices = Eigen::Map<const Points>(flat.data(), n, 3);
    mesh.faces = rig.faces;
    mesh.normals = vertex_normals(mesh.vertices, *rig.faces);
    return mesh;
}

Points joint_locations(const FaceRig& rig, const IdentityParams& beta) {
    require(beta.coefficients.size() == rig.identity_dims(), ErrorCode::InvalidParameter,
            "identity parameter length " + std::to_string(beta.coefficients.size()) +
                " does not match rig |beta|=" + std::to_string(rig.identity_dims()));
    require(beta.coefficients.allFinite(), ErrorCode::InvalidParameter,
            "identity parameters must be finite");

    const int n = rig.vertex_count();
    const Vector flat = rig.identity_basis.transpose() * beta.coefficients;
    const Eigen::Map<const Points> displacement(flat.data(), n, 3);
    return rig.template_joints + rig.skinning_weights * displacement;
}

std::vector<Transform> forward_kinematics(const FaceRig& rig, const PoseParams& pose,
                                          const Points& joints) {
    const int k = rig.joint_count();
    require(pose.joint_rotations.rows() == k, ErrorCode::InvalidParameter,
            "pose has " + std::to_string(pose.joint_rotations.rows()) +
                " joint rotations, rig has K=" + std::to_string(k));
    require(pose.joint_rotations.allFinite(), ErrorCode::InvalidParameter,
            "pose parameters must be finite");
    require(joints.rows() == k, ErrorCode::InvalidParameter, "joint array length mismatch");

    std::vector<Transform> global(k);
    std::vector<bool> done(k, false);
    for (int j = 0; j < k; ++j) {
        // resolve ancestors first; the chain is bounded by K in a valid tree
        int chain_guard = 0;
        int cur = j;
        while (!done[cur]) {
            const int parent = rig.joint_parents[cur];
            if (parent == -1 || done[parent]) {
                const Vec3 pivot = joints.row(cur);
                Transform local = Transform::Identity();
                local.translate(pivot);
                local.rotate(euler_to_rotation(pose.joint_rotations.row(cur)));
                local.translate(-pivot);
                global[cur] = (parent == -1) ? local : Transform(global[parent] * local);
                done[cur] = true;
                cur = j;
            } else {
                cur = parent;
            }
            require(++chain_guard <= 2 * k + 2, ErrorCode::InvalidRig,
                    "joint parent graph contains a cycle");
        }
    }
    return global;
}

Points linear_blend_skinning(const Points& vertices, const std::vector<Transform>& transforms,
                             const Matrix& weights) {
    const int n = static_cast<int>(vertices.rows());
    const int k = static_cast<int>(transforms.size());
    require(weights.rows() == k && weights.cols() == n, ErrorCode::InvalidParameter,
            "skinning weights are " + std::to_string(weights.rows()) + "x" +
                std::to_string(weights.cols()) + ", expected " + std::to_string(k) + "x" +
                std::to_string(n));

    Points out = Points::Zero(n, 3);
    for (int j = 0; j < k; ++j) {
        const Mat3 rot = transforms[j].linear();
        const Vec3 trans = transforms[j].translation();
        for (int v = 0; v < n; ++v) {
            const double w = weights(j, v);
            if (w == 0.0) continue;
            out.row(v) += w * (rot * vertices.row(v).transpose() + trans).transpose();
        }
    }
    return out;
}

Mesh posed_mesh(const FaceRig& rig, const IdentityParams& beta, const ExpressionParams& psi,
                const PoseParams& pose) {
    Mesh bind = bind_pose_mesh(rig, beta, psi);
    const Points joints = joint_locations(rig, beta);
    const std::vector<Transform> transforms = forward_kinematics(rig, pose, joints);

    Mesh mesh;
    mesh.vertices = linear_blend_skinning(bind.vertices, transforms, rig.skinning_weights);
    mesh.faces = rig.faces;
    mesh.normals = vertex_normals(mesh.vertices, *rig.faces);
    return mesh;
}

}  // namespace faceforge
