#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <vector>

namespace handsynth {

// Row-major dynamic matrices mirror the on-disk blob layout.
using MatrixXfR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixXdR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixXiR = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Points3f = Eigen::Matrix<float, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points3d = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points2d = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using Points2f = Eigen::Matrix<float, Eigen::Dynamic, 2, Eigen::RowMajor>;
using Triangles = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 3, Eigen::RowMajor>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Rigid = Eigen::Isometry3d;

// Triangle mesh in meters. UVs are either per-vertex (uv_faces empty, uvs has
// one row per vertex) or indexed separately through uv_faces (OBJ style).
struct Mesh {
  Points3d vertices;
  Triangles faces;
  Points2d uvs;
  Triangles uv_faces;

  Eigen::Index num_vertices() const { return vertices.rows(); }
  Eigen::Index num_faces() const { return faces.rows(); }
  bool has_uvs() const { return uvs.rows() > 0; }
};

// Applies a rigid transform to every vertex.
inline Points3d transform_points(const Rigid& g, const Points3d& pts) {
  Points3d out(pts.rows(), 3);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    out.row(i) = (g * Vec3(pts.row(i).transpose())).transpose();
  }
  return out;
}

inline Mesh transform_mesh(const Rigid& g, const Mesh& mesh) {
  Mesh out = mesh;
  out.vertices = transform_points(g, mesh.vertices);
  return out;
}

}  // namespace handsynth
