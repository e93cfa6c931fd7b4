#include "faceforge/assets.hpp"

#include <algorithm>
#include <cmath>

#include "faceforge/face_model.hpp"

namespace faceforge {

namespace {

// Head surface parameterization. Directions are unit vectors with +y up and
// +z out of the face; azimuth 0 is the front, positive toward subject right
// (+x), elevation positive upward.
constexpr double kHeadX = 0.085;  // half-width, meters
constexpr double kHeadY = 0.115;  // half-height
constexpr double kHeadZ = 0.092;  // half-depth

constexpr int kRings = 22;
constexpr int kColumns = 26;

Vec3 dir_from_angles(double azimuth, double elevation) {
    return {std::cos(elevation) * std::sin(azimuth), std::sin(elevation),
            std::cos(elevation) * std::cos(azimuth)};
}

double angular_distance(const Vec3& a, const Vec3& b) {
    return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

double feature_window(const Vec3& dir, const Vec3& center, double width) {
    const double t = angular_distance(dir, center) / width;
    return std::exp(-t * t);
}

double smoothstep01(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

struct HeadFeatures {
    Vec3 eye_left = dir_from_angles(-0.38, 0.29);   // subject left (-x)
    Vec3 eye_right = dir_from_angles(0.38, 0.29);
    Vec3 brow_left = dir_from_angles(-0.38, 0.47);
    Vec3 brow_right = dir_from_angles(0.38, 0.47);
    Vec3 nose = dir_from_angles(0.0, -0.05);
    Vec3 mouth = dir_from_angles(0.0, -0.42);
    Vec3 chin = dir_from_angles(0.0, -0.85);
    Vec3 cheek_left = dir_from_angles(-0.62, -0.20);
    Vec3 cheek_right = dir_from_angles(0.62, -0.20);
};

double head_radius(const Vec3& dir, const HeadFeatures& f) {
    const double base = 1.0 / std::sqrt((dir.x() / kHeadX) * (dir.x() / kHeadX) +
                                        (dir.y() / kHeadY) * (dir.y() / kHeadY) +
                                        (dir.z() / kHeadZ) * (dir.z() / kHeadZ));
    double r = base;
    r += 0.022 * feature_window(dir, f.nose, 0.20);
    r -= 0.006 * feature_window(dir, f.eye_left, 0.15);
    r -= 0.006 * feature_window(dir, f.eye_right, 0.15);
    r += 0.004 * feature_window(dir, f.brow_left, 0.14);
    r += 0.004 * feature_window(dir, f.brow_right, 0.14);
    r += 0.005 * feature_window(dir, f.mouth, 0.16);
    r += 0.006 * feature_window(dir, f.chin, 0.25);
    // jaw tapers toward the chin at the back and sides
    const double below = smoothstep01((-0.35 - std::asin(std::clamp(dir.y(), -1.0, 1.0))) / 0.8);
    r *= 1.0 - 0.10 * below * (1.0 - feature_window(dir, f.chin, 0.5));
    return r;
}

Vec3 head_surface(double azimuth, double elevation, const HeadFeatures& f) {
    const Vec3 d = dir_from_angles(azimuth, elevation);
    return head_radius(d, f) * d;
}

// Closest point on a triangle (Ericson), returning barycentrics of the result.
Vec3 closest_point_barycentric(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return {1, 0, 0};

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return {0, 1, 0};

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return {1 - v, v, 0};
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return {0, 0, 1};

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return {1 - w, 0, w};
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return {0, 1 - w, w};
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return {1 - v - w, v, w};
}

LandmarkAnchor snap_to_mesh(const Vec3& target, const Points& vertices, const Faces& faces) {
    LandmarkAnchor best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < faces.rows(); ++i) {
        const Vec3 a = vertices.row(faces(i, 0));
        const Vec3 b = vertices.row(faces(i, 1));
        const Vec3 c = vertices.row(faces(i, 2));
        const Vec3 bary = closest_point_barycentric(target, a, b, c);
        const Vec3 point = bary.x() * a + bary.y() * b + bary.z() * c;
        const double dist = (point - target).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best.face = i;
            best.barycentric = bary;
        }
    }
    // exact simplex coordinates for the rig invariant
    best.barycentric = best.barycentric.cwiseMax(0.0);
    best.barycentric /= best.barycentric.sum();
    return best;
}

std::vector<Vec3> landmark_targets_68(const HeadFeatures& f) {
    std::vector<Vec3> pts;
    pts.reserve(68);

    // 0-16 jaw, subject right ear to subject left ear through the chin
    for (int i = 0; i < 17; ++i) {
        const double t = i / 16.0;
        const double az = 1.25 * (1.0 - 2.0 * t);
        const double el = -0.02 + (-0.92 + 0.02) * std::sin(M_PI * t);
        pts.push_back(head_surface(az, el, f));
    }
    // 17-21 subject-right brow (image left to right: outer to inner)
    for (int i = 0; i < 5; ++i) {
        const double s = i / 4.0;
        const double az = 0.58 - 0.42 * s;
        const double el = 0.44 + 0.06 * std::sin(M_PI * s);
        pts.push_back(head_surface(az, el, f));
    }
    // 22-26 subject-left brow (inner to outer)
    for (int i = 0; i < 5; ++i) {
        const double s = i / 4.0;
        const double az = -0.16 - 0.42 * s;
        const double el = 0.44 + 0.06 * std::sin(M_PI * (1.0 - s));
        pts.push_back(head_surface(az, el, f));
    }
    // 27-30 nose bridge
    for (int i = 0; i < 4; ++i) {
        pts.push_back(head_surface(0.0, 0.30 - 0.13 * i, f));
    }
    // 31-35 nostril row
    for (int i = 0; i < 5; ++i) {
        pts.push_back(head_surface(0.16 - 0.08 * i, -0.16, f));
    }
    // 36-41 subject-right eye: outer corner, two top, inner corner, two bottom
    // 42-47 subject-left eye: inner corner, two top, outer corner, two bottom
    const double el_eye = 0.29, daz = 0.13, del = 0.055;
    for (int eye = 0; eye < 2; ++eye) {
        const double az_c = eye == 0 ? 0.38 : -0.38;
        const double sign = eye == 0 ? 1.0 : -1.0;
        pts.push_back(head_surface(az_c + sign * daz, el_eye, f));
        pts.push_back(head_surface(az_c + sign * 0.05, el_eye + del, f));
        pts.push_back(head_surface(az_c - sign * 0.05, el_eye + del, f));
        pts.push_back(head_surface(az_c - sign * daz, el_eye, f));
        pts.push_back(head_surface(az_c - sign * 0.05, el_eye - del, f));
        pts.push_back(head_surface(az_c + sign * 0.05, el_eye - del, f));
    }
    // 48-59 outer lips: right corner, upper arc, left corner, lower arc
    const double el_m = -0.42;
    const double outer_az[12] = {0.30, 0.20, 0.10, 0.0, -0.10, -0.20, -0.30, -0.20, -0.10, 0.0, 0.10, 0.20};
    const double outer_el[12] = {0.0, 0.055, 0.085, 0.095, 0.085, 0.055, 0.0, -0.070, -0.095, -0.105, -0.095, -0.070};
    for (int i = 0; i < 12; ++i) pts.push_back(head_surface(outer_az[i], el_m + outer_el[i], f));
    // 60-67 inner lips
    const double inner_az[8] = {0.18, 0.08, 0.0, -0.08, -0.18, -0.08, 0.0, 0.08};
    const double inner_el[8] = {0.0, 0.040, 0.048, 0.040, 0.0, -0.040, -0.048, -0.040};
    for (int i = 0; i < 8; ++i) pts.push_back(head_surface(inner_az[i], el_m + inner_el[i], f));

    return pts;
}

// Smooth localized displacement fields for the built-in bases. Each row of
// the output is a flattened N x 3 field.
Matrix smooth_fields(const Points& vertices, int count, double base_amplitude,
                     const std::vector<Vec3>& window_centers, double window_width, Rng& rng) {
    const int n = static_cast<int>(vertices.rows());
    Matrix fields = Matrix::Zero(count, 3 * n);
    for (int i = 0; i < count; ++i) {
        const double amp = base_amplitude * std::pow(0.965, i);
        const double fa = 1.0 + rng.uniform_index(4);
        const double fb = 1.0 + rng.uniform_index(4);
        const double pa = rng.uniform(0.0, 2.0 * M_PI);
        const double pb = rng.uniform(0.0, 2.0 * M_PI);
        const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        Vec3 center = Vec3::Zero();
        bool windowed = false;
        if (!window_centers.empty()) {
            center = window_centers[rng.uniform_index(window_centers.size())];
            windowed = true;
        }
        for (int v = 0; v < n; ++v) {
            const Vec3 dir = Vec3(vertices.row(v)).normalized();
            const double el = std::asin(std::clamp(dir.y(), -1.0, 1.0));
            const double az = std::atan2(dir.x(), dir.z());
            double g = std::sin(fa * el + pa) * std::cos(fb * az + pb);
            if (windowed) g *= feature_window(dir, center, window_width);
            const Vec3 disp = amp * g * (0.6 * dir + 0.4 * axis);
            fields.block<1, 3>(i, 3 * v) = disp.transpose();
        }
    }
    return fields;
}

void add_window_displacement(Matrix& basis, int row, const Points& vertices, const Vec3& center,
                             double width, const Vec3& displacement) {
    for (int v = 0; v < vertices.rows(); ++v) {
        const Vec3 dir = Vec3(vertices.row(v)).normalized();
        const double w = feature_window(dir, center, width);
        basis.block<1, 3>(row, 3 * v) += (w * displacement).transpose();
    }
}

}  // namespace

FaceRig build_desk_rig(const DeskRigOptions& options) {
    require(options.identity_dims >= 1 && options.expression_dims >= 1, ErrorCode::Config,
            "desk rig needs at least one identity and one expression component");

    const HeadFeatures f;
    FaceRig rig;

    // --- geometry: lat/long sphere shell shaped into a head ---
    const int n = 2 + kRings * kColumns;
    rig.template_vertices.resize(n, 3);
    rig.template_vertices.row(0) = head_surface(0.0, M_PI / 2.0, f).transpose();  // top pole
    for (int r = 0; r < kRings; ++r) {
        const double el = M_PI / 2.0 - M_PI * (r + 1) / (kRings + 1);
        for (int c = 0; c < kColumns; ++c) {
            const double az = 2.0 * M_PI * c / kColumns - M_PI;  // wraps, front at c=kColumns/2
            rig.template_vertices.row(1 + r * kColumns + c) = head_surface(az, el, f).transpose();
        }
    }
    rig.template_vertices.row(n - 1) = head_surface(0.0, -M_PI / 2.0, f).transpose();  // bottom pole

    auto ring_vertex = [](int r, int c) { return 1 + r * kColumns + ((c % kColumns + kColumns) % kColumns); };

    std::vector<int> tri;
    tri.reserve(3 * (2 * kColumns + 2 * (kRings - 1) * kColumns));
    for (int c = 0; c < kColumns; ++c) {  // top fan
        tri.insert(tri.end(), {0, ring_vertex(0, c), ring_vertex(0, c + 1)});
    }
    for (int r = 0; r + 1 < kRings; ++r) {
        for (int c = 0; c < kColumns; ++c) {
            const int a = ring_vertex(r, c), b = ring_vertex(r, c + 1);
            const int d = ring_vertex(r + 1, c), e = ring_vertex(r + 1, c + 1);
            tri.insert(tri.end(), {a, d, e});
            tri.insert(tri.end(), {a, e, b});
        }
    }
    for (int c = 0; c < kColumns; ++c) {  // bottom fan
        tri.insert(tri.end(), {n - 1, ring_vertex(kRings - 1, c + 1), ring_vertex(kRings - 1, c)});
    }
    auto faces = std::make_shared<Faces>(static_cast<int>(tri.size() / 3), 3);
    for (int i = 0; i < faces->rows(); ++i) {
        (*faces)(i, 0) = tri[3 * i];
        (*faces)(i, 1) = tri[3 * i + 1];
        (*faces)(i, 2) = tri[3 * i + 2];
    }
    rig.faces = faces;

    // --- skeleton: neck (root) -> head -> two eyes ---
    rig.template_joints.resize(4, 3);
    rig.template_joints.row(0) = Vec3(0.0, -0.100, -0.010).transpose();
    rig.template_joints.row(1) = Vec3(0.0, -0.030, 0.005).transpose();
    rig.template_joints.row(2) = ((head_radius(f.eye_left, f) - 0.013) * f.eye_left).transpose();
    rig.template_joints.row(3) = ((head_radius(f.eye_right, f) - 0.013) * f.eye_right).transpose();
    rig.joint_parents = {-1, 0, 1, 1};
    rig.joint_names = {"neck", "head", "left_eye", "right_eye"};

    rig.skinning_weights.resize(4, n);
    for (int v = 0; v < n; ++v) {
        const Vec3 p = rig.template_vertices.row(v);
        const Vec3 dir = p.normalized();
        const double w_eye_l = 0.9 * feature_window(dir, f.eye_left, 0.10);
        const double w_eye_r = 0.9 * feature_window(dir, f.eye_right, 0.10);
        const double w_neck = smoothstep01((-0.070 - p.y()) / 0.045);
        double w_head = std::max(0.0, 1.0 - w_eye_l - w_eye_r - w_neck);
        double sum = w_eye_l + w_eye_r + w_neck + w_head;
        rig.skinning_weights(0, v) = w_neck / sum;
        rig.skinning_weights(1, v) = w_head / sum;
        rig.skinning_weights(2, v) = w_eye_l / sum;
        rig.skinning_weights(3, v) = w_eye_r / sum;
    }

    // --- semantic regions, assigned by face centroid ---
    const double el_mouth = -0.42;
    rig.face_regions.resize(faces->rows(), SemanticClass::Skin);
    for (int i = 0; i < faces->rows(); ++i) {
        const Vec3 centroid = (Vec3(rig.template_vertices.row((*faces)(i, 0))) +
                               Vec3(rig.template_vertices.row((*faces)(i, 1))) +
                               Vec3(rig.template_vertices.row((*faces)(i, 2)))) /
                              3.0;
        const Vec3 dir = centroid.normalized();
        const double az = std::atan2(dir.x(), dir.z());
        const double el = std::asin(std::clamp(dir.y(), -1.0, 1.0));

        SemanticClass cls = SemanticClass::Skin;
        if (angular_distance(dir, f.eye_left) < 0.125) {
            cls = SemanticClass::LeftEye;
        } else if (angular_distance(dir, f.eye_right) < 0.125) {
            cls = SemanticClass::RightEye;
        } else if (angular_distance(dir, f.brow_left) < 0.115) {
            cls = SemanticClass::LeftBrow;
        } else if (angular_distance(dir, f.brow_right) < 0.115) {
            cls = SemanticClass::RightBrow;
        } else if (angular_distance(dir, f.nose) < 0.17) {
            cls = SemanticClass::Nose;
        } else if (std::abs(az) < 0.34) {
            const double d = el - el_mouth;
            if (d > 0.03 && d <= 0.11) cls = SemanticClass::UpperLip;
            else if (d > -0.03 && d <= 0.03) cls = SemanticClass::InnerMouth;
            else if (d > -0.12 && d <= -0.03) cls = SemanticClass::LowerLip;
        }
        rig.face_regions[i] = cls;
    }

    // --- landmark anchors ---
    const std::vector<Vec3> sparse_targets = landmark_targets_68(f);
    rig.landmark_anchors.reserve(68);
    for (const Vec3& t : sparse_targets) {
        rig.landmark_anchors.push_back(snap_to_mesh(t, rig.template_vertices, *faces));
    }
    if (options.dense_landmarks) {
        // 68 sparse anchors plus quasi-uniform samples over the front of the
        // face, emitted by a fixed procedure so the set is versioned data.
        rig.dense_anchors = rig.landmark_anchors;
        std::vector<int> front_faces;
        for (int i = 0; i < faces->rows(); ++i) {
            const Vec3 centroid = (Vec3(rig.template_vertices.row((*faces)(i, 0))) +
                                   Vec3(rig.template_vertices.row((*faces)(i, 1))) +
                                   Vec3(rig.template_vertices.row((*faces)(i, 2)))) /
                                  3.0;
            if (centroid.z() > 0.015) front_faces.push_back(i);
        }
        Rng rng(derive_seed(options.seed, "dense-landmarks"));
        while (rig.dense_anchors.size() < 679) {
            LandmarkAnchor a;
            a.face = front_faces[rig.dense_anchors.size() % front_faces.size()];
            double u = rng.uniform(), v = rng.uniform();
            if (u + v > 1.0) {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            a.barycentric = Vec3(1.0 - u - v, u, v);
            a.barycentric /= a.barycentric.sum();
            rig.dense_anchors.push_back(a);
        }
    }

    // --- identity basis: a few semantic components, then smooth noise fields ---
    rig.identity_basis = Matrix::Zero(options.identity_dims, 3 * n);
    {
        Rng rng(derive_seed(options.seed, "identity-basis"));
        const std::vector<Vec3> windows = {f.nose, f.chin, f.cheek_left, f.cheek_right,
                                           f.brow_left, f.brow_right};
        int row = 0;
        auto have = [&](int r) { return r < options.identity_dims; };
        if (have(row)) {  // overall size
            for (int v = 0; v < n; ++v) {
                const Vec3 dir = Vec3(rig.template_vertices.row(v)).normalized();
                rig.identity_basis.block<1, 3>(row, 3 * v) = (0.008 * dir).transpose();
            }
            ++row;
        }
        if (have(row)) {  // vertical elongation
            for (int v = 0; v < n; ++v) {
                rig.identity_basis(row, 3 * v + 1) = 0.010 * rig.template_vertices(v, 1) / kHeadY;
            }
            ++row;
        }
        if (have(row)) {  // width
            for (int v = 0; v < n; ++v) {
                rig.identity_basis(row, 3 * v) = 0.008 * rig.template_vertices(v, 0) / kHeadX;
            }
            ++row;
        }
        if (have(row)) {  // jaw width
            for (int v = 0; v < n; ++v) {
                const Vec3 p = rig.template_vertices.row(v);
                const double lower = smoothstep01((-0.02 - p.y()) / 0.06);
                rig.identity_basis(row, 3 * v) = 0.010 * lower * p.x() / kHeadX;
            }
            ++row;
        }
        if (have(row)) {  // nose prominence
            add_window_displacement(rig.identity_basis, row, rig.template_vertices, f.nose, 0.20,
                                    Vec3(0, 0, 0.006));
            ++row;
        }
        if (row < options.identity_dims) {
            rig.identity_basis.bottomRows(options.identity_dims - row) = smooth_fields(
                rig.template_vertices, options.identity_dims - row, 0.0045, {}, 0.0, rng);
        }

        // The joint equation Jbar + W * (beta S) sums raw skinning weights over
        // each joint's whole region, so an uncorrected field would be amplified
        // by the row sum. Project every component so each joint moves by its
        // region's weighted-mean displacement instead.
        const Matrix& weights = rig.skinning_weights;
        const Vector row_sums = weights.rowwise().sum();
        Matrix region_mean = weights;  // rows normalized to sum 1
        for (int j = 0; j < region_mean.rows(); ++j) {
            if (row_sums(j) > 0.0) region_mean.row(j) /= row_sums(j);
        }
        const Matrix coupling_matrix = weights * region_mean.transpose();  // K x K
        const auto solver = coupling_matrix.partialPivLu();
        for (int i = 0; i < options.identity_dims; ++i) {
            Vector flat = rig.identity_basis.row(i).transpose();
            const Eigen::Map<const Points> field(flat.data(), n, 3);
            const Matrix raw = weights * field;          // K x 3
            const Matrix desired = region_mean * field;  // K x 3
            const Matrix correction = solver.solve(desired - raw);
            Points corrected = field;
            corrected += region_mean.transpose() * correction;
            rig.identity_basis.row(i) = Eigen::Map<const Vector>(corrected.data(), 3 * n).transpose();
        }
    }

    // --- expression basis ---
    rig.expression_basis = Matrix::Zero(options.expression_dims, 3 * n);
    {
        Rng rng(derive_seed(options.seed, "expression-basis"));
        const Vec3 mouth_left = dir_from_angles(-0.30, el_mouth);
        const Vec3 mouth_right = dir_from_angles(0.30, el_mouth);
        const Vec3 lid_left = dir_from_angles(-0.38, 0.35);
        const Vec3 lid_right = dir_from_angles(0.38, 0.35);
        int row = 0;
        auto have = [&](int r) { return r < options.expression_dims; };
        if (have(row)) {  // 0: jaw open
            for (int v = 0; v < n; ++v) {
                const Vec3 p = rig.template_vertices.row(v);
                const Vec3 dir = p.normalized();
                const double front = smoothstep01((dir.z() + 0.1) / 0.5);
                const double lower = smoothstep01((-0.28 - std::asin(std::clamp(dir.y(), -1.0, 1.0))) / 0.35);
                rig.expression_basis(row, 3 * v + 1) -= 0.016 * front * lower;
                rig.expression_basis(row, 3 * v + 2) -= 0.003 * front * lower;
            }
            ++row;
        }
        if (have(row)) {  // 1: smile
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, mouth_left,
                                    0.16, Vec3(-0.004, 0.006, 0.001));
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, mouth_right,
                                    0.16, Vec3(0.004, 0.006, 0.001));
            ++row;
        }
        if (have(row)) {  // 2: frown
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, mouth_left,
                                    0.16, Vec3(0.001, -0.006, 0));
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, mouth_right,
                                    0.16, Vec3(-0.001, -0.006, 0));
            ++row;
        }
        if (have(row)) {  // 3: left eyelid close (gaze-coupled)
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, lid_left,
                                    0.13, Vec3(0, -0.011, 0));
            ++row;
        }
        if (have(row)) {  // 4: right eyelid close (gaze-coupled)
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, lid_right,
                                    0.13, Vec3(0, -0.011, 0));
            ++row;
        }
        if (have(row)) {  // 5/6: brow raises
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, f.brow_left,
                                    0.15, Vec3(0, 0.008, 0.001));
            ++row;
        }
        if (have(row)) {
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, f.brow_right,
                                    0.15, Vec3(0, 0.008, 0.001));
            ++row;
        }
        if (have(row)) {  // 7: pucker
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, f.mouth,
                                    0.18, Vec3(0, 0, 0.007));
            ++row;
        }
        if (have(row)) {  // 8: cheek puff
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, f.cheek_left,
                                    0.20, Vec3(-0.006, 0, 0.002));
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, f.cheek_right,
                                    0.20, Vec3(0.006, 0, 0.002));
            ++row;
        }
        if (have(row)) {  // 9: nose wrinkle
            add_window_displacement(rig.expression_basis, row, rig.template_vertices, f.nose, 0.16,
                                    Vec3(0, 0.004, -0.002));
            ++row;
        }
        if (row < options.expression_dims) {
            rig.expression_basis.bottomRows(options.expression_dims - row) =
                smooth_fields(rig.template_vertices, options.expression_dims - row, 0.0035,
                              {f.mouth, f.brow_left, f.brow_right, f.cheek_left, f.cheek_right},
                              0.30, rng);
        }
    }

    // --- derived per-vertex uvs: cylindrical unwrap of the template ---
    rig.uvs.resize(n, 2);
    const double y_min = rig.template_vertices.col(1).minCoeff();
    const double y_max = rig.template_vertices.col(1).maxCoeff();
    for (int v = 0; v < n; ++v) {
        const Vec3 p = rig.template_vertices.row(v);
        rig.uvs(v, 0) = std::atan2(p.x(), p.z()) / (2.0 * M_PI) + 0.5;
        rig.uvs(v, 1) = (p.y() - y_min) / (y_max - y_min);
    }

    rig.validate();
    return rig;
}

ExpressionLibrary build_expression_library(const FaceRig& rig, int entry_count,
                                           int sequence_length, std::uint64_t seed) {
    require(entry_count >= 1 && sequence_length >= 1, ErrorCode::Config,
            "expression library needs at least one entry and one keyframe");
    const int dims = rig.expression_dims();
    ExpressionLibrary lib;

    Rng rng(derive_seed(seed, "library"));
    lib.entries.reserve(entry_count);
    for (int i = 0; i < entry_count; ++i) {
        Vector psi = Vector::Zero(dims);
        const int active = 2 + static_cast<int>(rng.uniform_index(4));
        for (int a = 0; a < active; ++a) {
            const int idx = static_cast<int>(rng.uniform_index(dims));
            psi(idx) += rng.uniform(-1.0, 1.0);
        }
        lib.entries.push_back(psi);
    }

    // Keyframed sequence sweeping through exaggerated single-component poses,
    // covering motion the sparse library misses.
    Rng seq_rng(derive_seed(seed, "sequence"));
    const int pose_count = std::min(8, dims);
    lib.sequence.reserve(sequence_length);
    for (int i = 0; i < sequence_length; ++i) {
        const double t = sequence_length == 1 ? 0.0 : static_cast<double>(i) / (sequence_length - 1);
        const double pos = t * (pose_count - 1);
        const int a = std::min(pose_count - 1, static_cast<int>(pos));
        const int b = std::min(pose_count - 1, a + 1);
        const double blend = smoothstep01(pos - a);
        Vector psi = Vector::Zero(dims);
        psi(a) += 1.4 * (1.0 - blend);
        psi(b) += 1.4 * blend;
        psi(seq_rng.uniform_index(dims)) += seq_rng.uniform(-0.25, 0.25);
        lib.sequence.push_back(psi);
    }
    return lib;
}

ScanCorpus synthesize_corpus(const FaceRig& rig, int scan_count, double noise_sigma,
                             std::uint64_t seed) {
    require(scan_count >= 2, ErrorCode::InvalidParameter,
            "corpus needs at least 2 scans, got " + std::to_string(scan_count));
    ScanCorpus corpus;
    corpus.topology_hash = rig.topology_hash();
    corpus.scans.reserve(scan_count);
    const int n = rig.vertex_count();
    for (int i = 0; i < scan_count; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        Vector beta(rig.identity_dims());
        for (int j = 0; j < beta.size(); ++j) beta(j) = rng.normal();
        Vector flat = Eigen::Map<const Vector>(rig.template_vertices.data(), 3 * n);
        flat += rig.identity_basis.transpose() * beta;
        if (noise_sigma > 0.0) {
            for (int j = 0; j < flat.size(); ++j) flat(j) += noise_sigma * rng.normal();
        }
        corpus.scans.push_back(Eigen::Map<const Points>(flat.data(), n, 3));
    }
    return corpus;
}

}  // namespace faceforge
