#include "handsynth/renderer.hpp"

#include "handsynth/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace handsynth {
namespace {

struct ClipVertex {
  Vec3 pos;     // camera space
  Vec3 normal;  // camera space
  Eigen::Vector2d uv;
};

// A near-clipped, screen-projected triangle ready for scan conversion.
struct ScreenTriangle {
  std::array<ClipVertex, 3> v;
  std::array<Eigen::Vector2d, 3> screen;
  std::array<double, 3> inv_z;
  double area = 0.0;
  int item = 0;
};

struct SampleGrid {
  int width = 0;
  int height = 0;
  int scale = 1;
  std::vector<double> z;
  std::vector<int> triangle;   // -1 = empty
  std::vector<double> bary0;   // screen-space barycentrics of vertex 0 and 1
  std::vector<double> bary1;

  SampleGrid(int w, int h, int s)
      : width(w * s), height(h * s), scale(s),
        z(static_cast<std::size_t>(width) * height, std::numeric_limits<double>::infinity()),
        triangle(static_cast<std::size_t>(width) * height, -1),
        bary0(static_cast<std::size_t>(width) * height, 0.0),
        bary1(static_cast<std::size_t>(width) * height, 0.0) {}
};

double edge(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return (p.x() - a.x()) * (b.y() - a.y()) - (p.y() - a.y()) * (b.x() - a.x());
}

// Shared edges are traversed in opposite directions by the two triangles, so
// exactly one of them owns samples lying on the edge.
bool owns_edge(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const double dy = b.y() - a.y();
  const double dx = b.x() - a.x();
  return dy > 0.0 || (dy == 0.0 && dx < 0.0);
}

bool inside(double e, bool owner) { return e > 0.0 || (e == 0.0 && owner); }

void scan_triangle(const ScreenTriangle& tri, int tri_index, SampleGrid& grid) {
  const double s = grid.scale;
  double min_x = std::min({tri.screen[0].x(), tri.screen[1].x(), tri.screen[2].x()});
  double max_x = std::max({tri.screen[0].x(), tri.screen[1].x(), tri.screen[2].x()});
  double min_y = std::min({tri.screen[0].y(), tri.screen[1].y(), tri.screen[2].y()});
  double max_y = std::max({tri.screen[0].y(), tri.screen[1].y(), tri.screen[2].y()});
  const int j0 = std::max(0, static_cast<int>(std::ceil(min_x * s - 0.5)));
  const int j1 = std::min(grid.width - 1, static_cast<int>(std::floor(max_x * s - 0.5)));
  const int i0 = std::max(0, static_cast<int>(std::ceil(min_y * s - 0.5)));
  const int i1 = std::min(grid.height - 1, static_cast<int>(std::floor(max_y * s - 0.5)));
  if (j0 > j1 || i0 > i1) return;

  const auto& a = tri.screen[0];
  const auto& b = tri.screen[1];
  const auto& c = tri.screen[2];
  const bool own_bc = owns_edge(b, c);
  const bool own_ca = owns_edge(c, a);
  const bool own_ab = owns_edge(a, b);
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      const Eigen::Vector2d p((j + 0.5) / s, (i + 0.5) / s);
      const double e0 = edge(b, c, p);
      const double e1 = edge(c, a, p);
      const double e2 = edge(a, b, p);
      if (!inside(e0, own_bc) || !inside(e1, own_ca) || !inside(e2, own_ab)) continue;
      const double l0 = e0 / tri.area;
      const double l1 = e1 / tri.area;
      const double l2 = 1.0 - l0 - l1;
      const double inv_z = l0 * tri.inv_z[0] + l1 * tri.inv_z[1] + l2 * tri.inv_z[2];
      if (!(inv_z > 0.0)) continue;
      const double z = 1.0 / inv_z;
      const auto idx = static_cast<std::size_t>(i) * grid.width + j;
      if (z < grid.z[idx]) {
        grid.z[idx] = z;
        grid.triangle[idx] = tri_index;
        grid.bary0[idx] = l0;
        grid.bary1[idx] = l1;
      }
    }
  }
}

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  return {a.pos + t * (b.pos - a.pos), a.normal + t * (b.normal - a.normal), a.uv + t * (b.uv - a.uv)};
}

// Sutherland-Hodgman against z = near; returns 0, 3 or 4 vertices.
std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& in, double near) {
  std::vector<ClipVertex> out;
  out.reserve(4);
  for (int k = 0; k < 3; ++k) {
    const ClipVertex& cur = in[k];
    const ClipVertex& nxt = in[(k + 1) % 3];
    const bool cur_in = cur.pos.z() >= near;
    const bool nxt_in = nxt.pos.z() >= near;
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double t = (near - cur.pos.z()) / (nxt.pos.z() - cur.pos.z());
      ClipVertex v = lerp(cur, nxt, t);
      v.pos.z() = near;
      out.push_back(v);
    }
  }
  return out;
}

struct CameraLight {
  LightKind kind;
  Vec3 radiance;  // color * intensity
  Vec3 position;
  Vec3 direction;
  double cos_outer;
  double cos_inner;
};

Vec3 shade(const ScreenTriangle& tri, const std::vector<SceneItem>& scene, double l0, double l1,
           const std::vector<CameraLight>& lights, bool clamp) {
  const double l2 = 1.0 - l0 - l1;
  // Perspective-correct weights.
  double w0 = l0 * tri.inv_z[0], w1 = l1 * tri.inv_z[1], w2 = l2 * tri.inv_z[2];
  const double sum = w0 + w1 + w2;
  w0 /= sum;
  w1 /= sum;
  w2 /= sum;
  const Vec3 p = w0 * tri.v[0].pos + w1 * tri.v[1].pos + w2 * tri.v[2].pos;
  Vec3 n = w0 * tri.v[0].normal + w1 * tri.v[1].normal + w2 * tri.v[2].normal;
  const Vec3 view = (-p).normalized();
  if (n.squaredNorm() < 1e-30) n = view;
  n.normalize();
  if (n.dot(view) < 0.0) n = -n;

  const Material& mat = scene[static_cast<std::size_t>(tri.item)].material;
  Vec3 albedo = mat.albedo;
  if (mat.texture) {
    const Eigen::Vector2d uv = w0 * tri.v[0].uv + w1 * tri.v[1].uv + w2 * tri.v[2].uv;
    albedo = sample_texture(*mat.texture, uv.x(), uv.y());
  }

  Vec3 color = Vec3::Zero();
  for (const auto& light : lights) {
    if (light.kind == LightKind::Ambient) {
      color += albedo.cwiseProduct(light.radiance);
      continue;
    }
    Vec3 to_light;
    double spot = 1.0;
    if (light.kind == LightKind::Directional) {
      to_light = -light.direction;
    } else {
      to_light = (light.position - p).normalized();
      if (light.kind == LightKind::Spot) {
        const double cos_angle = (-to_light).dot(light.direction);
        spot = std::clamp((cos_angle - light.cos_outer) / (light.cos_inner - light.cos_outer), 0.0, 1.0);
      }
    }
    const double ndotl = n.dot(to_light);
    if (ndotl <= 0.0 || spot == 0.0) continue;
    const Vec3 half = (to_light + view).normalized();
    const double spec = mat.specular * std::pow(std::max(0.0, n.dot(half)), mat.shininess);
    color += spot * (ndotl * albedo.cwiseProduct(light.radiance) + spec * light.radiance);
  }
  if (clamp) color = color.cwiseMax(0.0).cwiseMin(1.0);
  return color;
}

}  // namespace

Vec3 sample_texture(const ImageRGBf& tex, double u, double v) {
  const double x = (u - std::floor(u)) * tex.width() - 0.5;
  const double y = (1.0 - (v - std::floor(v))) * tex.height() - 0.5;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
  auto at = [&](int yy, int xx) {
    const int r = wrap(yy, tex.height());
    const int c = wrap(xx, tex.width());
    return Vec3(tex(r, c, 0), tex(r, c, 1), tex(r, c, 2));
  };
  return (1.0 - fy) * ((1.0 - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) +
         fy * ((1.0 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
}

Points3d vertex_normals(const Mesh& mesh) {
  Points3d normals = Points3d::Zero(mesh.num_vertices(), 3);
  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    const Vec3 a = mesh.vertices.row(mesh.faces(f, 0)).transpose();
    const Vec3 b = mesh.vertices.row(mesh.faces(f, 1)).transpose();
    const Vec3 c = mesh.vertices.row(mesh.faces(f, 2)).transpose();
    const Vec3 n = (b - a).cross(c - a);  // length = 2 * area
    for (int k = 0; k < 3; ++k) normals.row(mesh.faces(f, k)) += n.transpose();
  }
  for (Eigen::Index v = 0; v < normals.rows(); ++v) {
    const double len = normals.row(v).norm();
    if (len > 0.0) normals.row(v) /= len;
  }
  return normals;
}

RenderOutput rasterize(const std::vector<SceneItem>& scene, const CameraSpec& camera,
                       const std::vector<LightSpec>& lights, const RenderConfig& config) {
  if (lights.empty()) throw Error(ErrorCode::EmptyInput, "rasterize needs at least one light");
  if (config.supersample < 1) throw Error(ErrorCode::DimensionMismatch, "supersample must be >= 1");
  const int W = camera.width;
  const int H = camera.height;
  const Rigid camera_from_world = camera.world_from_camera.inverse();
  const Mat3 rot = camera_from_world.linear();
  const Intrinsics& k = camera.intrinsics;

  // Geometry setup: camera space, near clipping, projection.
  std::vector<ScreenTriangle> tris;
  for (std::size_t item = 0; item < scene.size(); ++item) {
    const Mesh& mesh = scene[item].mesh;
    if (!mesh.vertices.allFinite()) throw Error(ErrorCode::DimensionMismatch, "mesh has non-finite vertices");
    const Points3d cam = transform_points(camera_from_world, mesh.vertices);
    const Points3d normals = vertex_normals(mesh);
    const bool indexed_uv = mesh.uv_faces.rows() == mesh.faces.rows() && mesh.has_uvs();
    const bool vertex_uv = !indexed_uv && mesh.uvs.rows() == mesh.vertices.rows();
    for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
      std::array<ClipVertex, 3> cv;
      for (int c = 0; c < 3; ++c) {
        const auto vi = mesh.faces(f, c);
        cv[c].pos = cam.row(vi).transpose();
        cv[c].normal = rot * Vec3(normals.row(vi).transpose());
        if (indexed_uv) {
          cv[c].uv = mesh.uvs.row(mesh.uv_faces(f, c)).transpose();
        } else if (vertex_uv) {
          cv[c].uv = mesh.uvs.row(vi).transpose();
        } else {
          cv[c].uv.setZero();
        }
      }
      const auto poly = clip_near(cv, config.near_plane);
      for (std::size_t t = 1; t + 1 < poly.size(); ++t) {
        ScreenTriangle st;
        st.v = {poly[0], poly[t], poly[t + 1]};
        st.item = static_cast<int>(item);
        for (int c = 0; c < 3; ++c) {
          const Vec3& p = st.v[c].pos;
          st.screen[c] = {k.cx + k.fx * p.x() / p.z(), k.cy + k.fy * p.y() / p.z()};
          st.inv_z[c] = 1.0 / p.z();
        }
        st.area = edge(st.screen[0], st.screen[1], st.screen[2]);
        if (st.area == 0.0 || !std::isfinite(st.area)) continue;
        if (st.area < 0.0) {
          std::swap(st.v[1], st.v[2]);
          std::swap(st.screen[1], st.screen[2]);
          std::swap(st.inv_z[1], st.inv_z[2]);
          st.area = -st.area;
        }
        tris.push_back(st);
      }
    }
  }

  SampleGrid center(W, H, 1);
  SampleGrid fine(W, H, config.supersample);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    scan_triangle(tris[t], static_cast<int>(t), center);
    if (config.supersample > 1) scan_triangle(tris[t], static_cast<int>(t), fine);
  }
  const SampleGrid& color_grid = config.supersample > 1 ? fine : center;

  std::vector<CameraLight> cam_lights;
  for (const auto& l : lights) {
    const double cone = std::max(l.cone_angle, 1e-6);
    cam_lights.push_back({l.kind, l.color * l.intensity, camera_from_world * l.position,
                          (rot * l.direction).normalized(), std::cos(cone * 1.15), std::cos(cone)});
  }

  RenderOutput out;
  out.rgb = ImageRGBf(W, H, 3);
  out.depth = DepthMap(W, H, 1);
  out.mask = LabelMap(W, H, 1);
  out.coverage = Image<float>(W, H, 1);
  bool any = false;
  const int s = config.supersample;
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const auto idx = static_cast<std::size_t>(r) * W + c;
      const int ct = center.triangle[idx];
      Vec3 center_color = Vec3::Zero();
      if (ct >= 0) {
        any = true;
        out.depth(r, c) = static_cast<float>(center.z[idx]);
        out.mask(r, c) = scene[static_cast<std::size_t>(tris[static_cast<std::size_t>(ct)].item)].instance_id;
        if (s == 1) {
          center_color = shade(tris[static_cast<std::size_t>(ct)], scene, center.bary0[idx], center.bary1[idx],
                               cam_lights, config.clamp_output);
        }
      }
      Vec3 sum = Vec3::Zero();
      int covered = 0;
      if (s > 1) {
        for (int di = 0; di < s; ++di) {
          for (int dj = 0; dj < s; ++dj) {
            const auto fidx = static_cast<std::size_t>(r * s + di) * color_grid.width + (c * s + dj);
            const int ft = color_grid.triangle[fidx];
            if (ft < 0) continue;
            sum += shade(tris[static_cast<std::size_t>(ft)], scene, color_grid.bary0[fidx], color_grid.bary1[fidx],
                         cam_lights, config.clamp_output);
            ++covered;
          }
        }
      } else if (ct >= 0) {
        sum = center_color;
        covered = 1;
      }
      Vec3 rgb = Vec3::Zero();
      if (covered > 0) {
        rgb = sum / covered;
      } else if (ct >= 0) {
        // Sliver hit only by the pixel-center sample.
        rgb = shade(tris[static_cast<std::size_t>(ct)], scene, center.bary0[idx], center.bary1[idx], cam_lights,
                    config.clamp_output);
      }
      out.coverage(r, c) = static_cast<float>(covered) / static_cast<float>(s * s);
      for (int ch = 0; ch < 3; ++ch) out.rgb(r, c, ch) = static_cast<float>(rgb[ch]);
    }
  }
  out.empty_viewport = !any;
  return out;
}

}  // namespace handsynth
