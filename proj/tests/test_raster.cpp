#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "faceforge/raster.hpp"
#include "faceforge/rng.hpp"

using namespace faceforge;

namespace {

Camera identity_camera(double focal, int width, int height) {
    Camera cam;
    cam.extrinsics = Transform::Identity();
    cam.focal_px = focal;
    cam.principal = Vec2(width / 2.0, height / 2.0);
    cam.width = width;
    cam.height = height;
    return cam;
}

SceneMesh simple_mesh(const Points& vertices, const Faces& faces,
                      SemanticClass cls = SemanticClass::Skin, const Vec3& albedo = Vec3(0.5, 0.5, 0.5)) {
    SceneMesh mesh;
    mesh.vertices = vertices;
    mesh.faces = faces;
    mesh.normals = Points::Zero(vertices.rows(), 3);
    for (int v = 0; v < vertices.rows(); ++v) mesh.normals(v, 2) = -1.0;  // toward the camera
    mesh.uvs.setZero(vertices.rows(), 2);
    mesh.face_classes.assign(faces.rows(), cls);
    mesh.face_albedo.assign(faces.rows(), albedo);
    return mesh;
}

// Moller-Trumbore nearest-hit reference: rays through pixel centers against
// every triangle, independent of the screen-space rasterization path.
struct RayHit {
    int triangle = -1;
    double z = kDepthBackground;
    double z_second = kDepthBackground;
};

RayHit ray_cast_pixel(const Camera& cam, double px, double py,
                      const std::vector<SceneMesh>& meshes) {
    const Vec3 dir((px - cam.principal.x()) / cam.focal_px,
                   -(py - cam.principal.y()) / cam.focal_px, 1.0);
    RayHit hit;
    int tri = 0;
    for (const SceneMesh& mesh : meshes) {
        for (int t = 0; t < mesh.faces.rows(); ++t, ++tri) {
            const Vec3 a = cam.extrinsics * Vec3(mesh.vertices.row(mesh.faces(t, 0)));
            const Vec3 b = cam.extrinsics * Vec3(mesh.vertices.row(mesh.faces(t, 1)));
            const Vec3 c = cam.extrinsics * Vec3(mesh.vertices.row(mesh.faces(t, 2)));
            const Vec3 e1 = b - a, e2 = c - a;
            const Vec3 pv = dir.cross(e2);
            const double det = e1.dot(pv);
            if (std::abs(det) < 1e-16) continue;
            const Vec3 s = -a;  // ray origin is the camera center
            const double uu = s.dot(pv) / det;
            if (uu < 0.0 || uu > 1.0) continue;
            const Vec3 qv = s.cross(e1);
            const double vv = dir.dot(qv) / det;
            if (vv < 0.0 || uu + vv > 1.0) continue;
            const double tz = e2.dot(qv) / det;
            if (tz <= 1e-6) continue;
            if (tz < hit.z) {
                hit.z_second = hit.z;
                hit.z = tz;
                hit.triangle = tri;
            } else if (tz < hit.z_second) {
                hit.z_second = tz;
            }
        }
    }
    return hit;
}

// distance (in edge-function units, normalized by the doubled area) of the
// pixel center to the nearest edge of a projected triangle
double edge_margin(const Camera& cam, const SceneMesh& mesh, int t, double px, double py) {
    Vec2 p[3];
    for (int c = 0; c < 3; ++c) {
        const Vec3 q = cam.extrinsics * Vec3(mesh.vertices.row(mesh.faces(t, c)));
        if (q.z() <= 1e-9) return 0.0;
        p[c] = {cam.principal.x() + cam.focal_px * q.x() / q.z(),
                cam.principal.y() - cam.focal_px * q.y() / q.z()};
    }
    const double area2 = (p[1].x() - p[0].x()) * (p[2].y() - p[0].y()) -
                         (p[1].y() - p[0].y()) * (p[2].x() - p[0].x());
    if (std::abs(area2) < 1e-12) return 0.0;
    double margin = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 3; ++c) {
        const Vec2& a = p[c];
        const Vec2& b = p[(c + 1) % 3];
        const double e = (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
        margin = std::min(margin, std::abs(e / area2));
    }
    return margin;
}

}  // namespace

TEST_CASE("project: axis, offset, and behind-camera points") {
    const Camera cam = identity_camera(100.0, 128, 128);

    SUBCASE("point on the optical axis hits the principal point") {
        const Vec3 p = project(cam, Vec3(0, 0, 2.5));
        CHECK(p.x() == cam.principal.x());
        CHECK(p.y() == cam.principal.y());
        CHECK(p.z() == 2.5);
    }

    SUBCASE("hand-computed perspective divide") {
        Camera c = identity_camera(100.0, 128, 128);
        c.principal = Vec2(64, 64);
        const Vec3 p = project(c, Vec3(0.1, 0, 1));
        CHECK(p.x() == doctest::Approx(74.0).epsilon(1e-12));
        CHECK(p.y() == doctest::Approx(64.0).epsilon(1e-12));
        // +y in camera space moves up in the image (smaller row)
        const Vec3 q = project(c, Vec3(0, 0.1, 1));
        CHECK(q.y() == doctest::Approx(54.0).epsilon(1e-12));
    }

    SUBCASE("points behind the camera get non-positive depth") {
        CHECK(project(cam, Vec3(0.3, -0.2, -1.5)).z() <= 0.0);
    }
}

TEST_CASE("rasterize: coverage and z-buffer basics") {
    const Camera cam = identity_camera(32.0, 64, 64);

    SUBCASE("full-screen triangle fills every pixel at its depth") {
        Points v(3, 3);
        v << -40, 40, 2, 40, 40, 2, 0, -40, 2;  // huge triangle at z=2
        Faces f(1, 3);
        f << 0, 1, 2;
        const LabelBundle bundle = rasterize({simple_mesh(v, f, SemanticClass::Nose)}, cam);
        for (std::size_t i = 0; i < bundle.pixel_count(); ++i) {
            CHECK(bundle.depth[i] == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(bundle.mask[i] == static_cast<std::uint8_t>(SemanticClass::Nose));
            CHECK(bundle.triangle_id[i] == 0);
        }
    }

    SUBCASE("nearer triangle wins every overlap pixel") {
        Points v(6, 3);
        v << -40, 40, 2, 40, 40, 2, 0, -40, 2,   // far
            -40, 40, 1, 40, 40, 1, 0, -40, 1;    // near
        Faces f(2, 3);
        f << 0, 1, 2, 3, 4, 5;
        SceneMesh mesh = simple_mesh(v, f);
        mesh.face_classes[0] = SemanticClass::Skin;
        mesh.face_classes[1] = SemanticClass::Hair;
        const LabelBundle bundle = rasterize({mesh}, cam);
        for (std::size_t i = 0; i < bundle.pixel_count(); ++i) {
            CHECK(bundle.depth[i] == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(bundle.triangle_id[i] == 1);
        }
    }

    SUBCASE("degenerate triangles are skipped and counted") {
        Points v(3, 3);
        v << 0, 0, 2, 1, 1, 2, 2, 2, 2;  // collinear
        Faces f(1, 3);
        f << 0, 1, 2;
        const LabelBundle bundle = rasterize({simple_mesh(v, f)}, cam);
        CHECK(bundle.diagnostics.degenerate_triangles == 1);
        for (std::size_t i = 0; i < bundle.pixel_count(); ++i) CHECK(bundle.triangle_id[i] == -1);
    }
}

TEST_CASE("rasterize matches the ray-cast oracle on random meshes") {
    const Camera cam = identity_camera(40.0, 64, 64);
    Rng rng(4242);
    int checked_pixels = 0;
    int agreed = 0;

    for (int trial = 0; trial < 40; ++trial) {
        const int nv = 12 + static_cast<int>(rng.uniform_index(30));
        const int nt = 20 + static_cast<int>(rng.uniform_index(181));
        Points v(nv, 3);
        for (int i = 0; i < nv; ++i) {
            v(i, 0) = rng.uniform(-1.2, 1.2);
            v(i, 1) = rng.uniform(-1.2, 1.2);
            v(i, 2) = rng.uniform(1.4, 3.6);
        }
        Faces f(nt, 3);
        for (int t = 0; t < nt; ++t) {
            for (int c = 0; c < 3; ++c) f(t, c) = static_cast<int>(rng.uniform_index(nv));
        }
        const std::vector<SceneMesh> meshes = {simple_mesh(v, f)};
        const LabelBundle bundle = rasterize(meshes, cam);

        for (int r = 0; r < cam.height; ++r) {
            for (int c = 0; c < cam.width; ++c) {
                const std::size_t idx = static_cast<std::size_t>(r) * cam.width + c;
                const double px = c + 0.5, py = r + 0.5;
                const RayHit hit = ray_cast_pixel(cam, px, py, meshes);
                const int raster_tri = bundle.triangle_id[idx];
                if (hit.triangle < 0 && raster_tri < 0) continue;

                // tie-break exclusions: near-edge pixels and depth ties
                if (hit.triangle >= 0 && edge_margin(cam, meshes[0], hit.triangle, px, py) < 1e-7) continue;
                if (raster_tri >= 0 && edge_margin(cam, meshes[0], raster_tri, px, py) < 1e-7) continue;
                if (std::isfinite(hit.z_second) && hit.z_second - hit.z < 1e-9 * hit.z) continue;

                ++checked_pixels;
                if (raster_tri == hit.triangle) ++agreed;
            }
        }
    }
    REQUIRE(checked_pixels > 10000);
    CHECK(static_cast<double>(agreed) / checked_pixels >= 0.99);
}

TEST_CASE("shade_color evaluates the lambertian formula") {
    Points v(3, 3);
    v << -40, 40, 2, 40, 40, 2, 0, -40, 2;
    Faces f(1, 3);
    f << 0, 1, 2;
    SceneMesh mesh = simple_mesh(v, f, SemanticClass::Skin, Vec3(1.0, 1.0, 1.0));
    const Camera cam = identity_camera(32.0, 64, 64);

    SUBCASE("ambient 1 returns the albedo") {
        LabelBundle bundle = rasterize({mesh}, cam);
        shade_color(bundle, Vec3(0, 0, -1), 1.0);
        for (std::size_t i = 0; i < bundle.pixel_count(); ++i) {
            CHECK(bundle.color[3 * i] == bundle.albedo[3 * i]);
        }
    }

    SUBCASE("normal perpendicular to light with zero ambient is black") {
        LabelBundle bundle = rasterize({mesh}, cam);
        shade_color(bundle, Vec3(1, 0, 0), 0.0);  // normals are (0,0,-1)
        for (std::size_t i = 0; i < bundle.pixel_count(); ++i) CHECK(bundle.color[3 * i] == 0.0f);
    }

    SUBCASE("n.l = 0.5 with ambient 0.2 gives 0.6") {
        // tilt the light 60 degrees off the normal
        LabelBundle bundle = rasterize({mesh}, cam);
        const Vec3 light = Vec3(std::sqrt(3.0) / 2.0, 0.0, -0.5);
        shade_color(bundle, light, 0.2);
        for (std::size_t i = 0; i < bundle.pixel_count(); ++i) {
            CHECK(bundle.color[3 * i] == doctest::Approx(0.6).epsilon(1e-6));
        }
    }
}

TEST_CASE("extract_landmarks visibility") {
    const Camera cam = identity_camera(40.0, 64, 64);
    // fan of four triangles around a central vertex, so the vertex anchor's
    // pixel is covered by the mesh itself
    Points v(5, 3);
    v << 0, 0, 2, 1.5, 0, 2, 0, 1.5, 2, -1.5, 0, 2, 0, -1.5, 2;
    Faces f(4, 3);
    f << 0, 1, 2, 0, 2, 3, 0, 3, 4, 0, 4, 1;
    std::vector<SceneMesh> meshes = {simple_mesh(v, f)};

    std::vector<LandmarkAnchor> anchors(2);
    anchors[0] = {0, Vec3(1, 0, 0)};                      // at the central vertex
    anchors[1] = {0, Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3)};    // triangle centroid

    SUBCASE("unoccluded anchors are visible at their projections") {
        const LabelBundle bundle = rasterize(meshes, cam);
        const auto lms = extract_landmarks(v, f, anchors, cam, bundle, 1e-6);
        REQUIRE(lms.size() == 2);
        const Vec3 expected = project(cam, Vec3(v.row(0)));
        CHECK(lms[0].visible);
        CHECK(lms[0].x == doctest::Approx(expected.x()).epsilon(1e-12));
        CHECK(lms[0].y == doctest::Approx(expected.y()).epsilon(1e-12));
        CHECK(lms[0].depth == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(lms[1].visible);
    }

    SUBCASE("a nearer occluder hides the anchor") {
        Points occ(3, 3);
        occ << -2, -2, 1, 2, -2, 1, 0, 2.5, 1;
        Faces fo(1, 3);
        fo << 0, 1, 2;
        meshes.push_back(simple_mesh(occ, fo, SemanticClass::Clothing));
        const LabelBundle bundle = rasterize(meshes, cam);
        const auto lms = extract_landmarks(v, f, anchors, cam, bundle, 1e-6);
        CHECK(!lms[0].visible);
        CHECK(!lms[1].visible);
    }

    SUBCASE("silhouette-grazing anchors on background pixels are not visible") {
        // a lone sliver whose corner pixel center lies outside the triangle:
        // no geometry at that pixel, so the conservative rule reports hidden
        Points sliver(3, 3);
        sliver << -1.0, -0.8, 2, 1.0, -0.8, 2, 0.0, 1.2, 2;
        Faces fs(1, 3);
        fs << 0, 1, 2;
        const LabelBundle bundle = rasterize({simple_mesh(sliver, fs)}, cam);
        const auto lms = extract_landmarks(sliver, fs, {{0, Vec3(1, 0, 0)}}, cam, bundle, 1e-6);
        const Vec3 p = project(cam, Vec3(sliver.row(0)));
        const std::size_t idx = static_cast<std::size_t>(static_cast<int>(p.y())) * cam.width +
                                static_cast<int>(p.x());
        REQUIRE(bundle.triangle_id[idx] == -1);
        CHECK(!lms[0].visible);
    }

    SUBCASE("off-screen anchors keep coordinates with visible=false") {
        Points far_v = v;
        far_v.col(0).array() += 100.0;  // way off frame
        const LabelBundle bundle = rasterize(meshes, cam);
        const auto lms = extract_landmarks(far_v, f, anchors, cam, bundle, 1e-6);
        CHECK(!lms[0].visible);
        CHECK(lms[0].x > cam.width);
    }
}
