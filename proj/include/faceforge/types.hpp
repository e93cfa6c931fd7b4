#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace faceforge {

using Scalar = double;

// Vertex arrays are row-major so one vertex's (x,y,z) is contiguous and a
// flattened view [x0,y0,z0,x1,...] of length 3N is a plain memory map.
using Points = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using Transform = Eigen::Isometry3d;

enum class ErrorCode : int {
    InvalidParameter = 1,
    InvalidRig = 2,
    Config = 3,
    InsufficientData = 4,
    Io = 5,
    Internal = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

// Per-pixel / per-face semantic vocabulary. The first 11 entries match the
// Helen/LaPa class list one-to-one; the attire classes below them down-map
// to Background for 11-class evaluation.
enum class SemanticClass : std::uint8_t {
    Background = 0,
    Skin = 1,
    LeftBrow = 2,
    RightBrow = 3,
    LeftEye = 4,
    RightEye = 5,
    Nose = 6,
    UpperLip = 7,
    InnerMouth = 8,
    LowerLip = 9,
    Hair = 10,
    Clothing = 11,
    Headwear = 12,
    Facewear = 13,
    Eyewear = 14,
};

constexpr int kSemanticClassCount = 15;
constexpr int kFaceVocabularyCount = 11;  // Helen/LaPa classes

const char* semantic_class_name(SemanticClass c);

// Attire classes collapse to Background under the 11-class face vocabulary;
// they are not part of the Helen/LaPa label set.
inline SemanticClass to_face_vocabulary(SemanticClass c) {
    return static_cast<int>(c) < kFaceVocabularyCount ? c : SemanticClass::Background;
}

}  // namespace faceforge
