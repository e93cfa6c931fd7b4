#pragma once

#include <vector>

#include "faceforge/rig.hpp"

namespace faceforge {

// Intrinsic X-then-Y-then-Z rotation, i.e. R = Rx(a) * Ry(b) * Rz(c) acting
// on column vectors. Output is orthonormal with det +1 within 1e-12.
Mat3 euler_to_rotation(const Vec3& angles);

// Bind-pose mesh: vertices = template + sum_i beta_i * S_i + sum_i psi_i * E_i.
Mesh bind_pose_mesh(const FaceRig& rig, const IdentityParams& beta, const ExpressionParams& psi);

// Identity-adjusted joint locations: J(beta) = Jbar + W * (identity displacement).
Points joint_locations(const FaceRig& rig, const IdentityParams& beta);

// Global rigid transform per joint: parent transform composed with a local
// rotation about the joint's own (identity-adjusted) location.
std::vector<Transform> forward_kinematics(const FaceRig& rig, const PoseParams& pose,
                                          const Points& joints);

// out_v = sum_k W(k,v) * (transform_k applied to x_v)
Points linear_blend_skinning(const Points& vertices, const std::vector<Transform>& transforms,
                             const Matrix& weights);

// Full mesh generating function: LBS(bind_pose(beta,psi), theta, J(beta); W).
Mesh posed_mesh(const FaceRig& rig, const IdentityParams& beta, const ExpressionParams& psi,
                const PoseParams& pose);

}  // namespace faceforge
