#include "gsdefend/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gsdefend/common.hpp"

namespace gsd {

namespace {

// World-space covariance without the unit-quaternion precondition: the
// backward pass and finite-difference probes evaluate at slightly
// denormalized quaternions, which rotation_from_quat absorbs.
Eigen::Matrix3d world_covariance(const GaussianSplat& s) {
  Eigen::Matrix3d R = rotation_from_quat(s.rotation);
  Eigen::Vector3d var = (2.0 * s.log_scales).array().exp();
  return R * var.asDiagonal() * R.transpose();
}

struct ViewGeometry {
  Eigen::Vector3d p_cam;
  Eigen::Matrix<double, 2, 3> J;   // pinhole Jacobian at p_cam
  Eigen::Matrix<double, 2, 3> A;   // J * camera rotation
};

ViewGeometry view_geometry(const GaussianSplat& s, const Camera& cam) {
  ViewGeometry g;
  g.p_cam = cam.to_camera(s.position);
  double x = g.p_cam[0], y = g.p_cam[1], z = g.p_cam[2];
  g.J << cam.fx / z, 0.0, -cam.fx * x / (z * z),
         0.0, cam.fy / z, -cam.fy * y / (z * z);
  g.A = g.J * cam.rotation;
  return g;
}

}  // namespace

std::optional<Projected2D> project(const GaussianSplat& splat, const Camera& camera,
                                   int splat_index) {
  Eigen::Vector3d p_cam = camera.to_camera(splat.position);
  if (!(p_cam[2] > kNearPlane)) return std::nullopt;

  ViewGeometry geo = view_geometry(splat, camera);
  Projected2D p;
  p.splat_index = splat_index;
  p.depth = p_cam[2];
  p.mean2d << camera.fx * p_cam[0] / p_cam[2] + camera.cx,
      camera.fy * p_cam[1] / p_cam[2] + camera.cy;
  p.cov2d = geo.A * world_covariance(splat) * geo.A.transpose();
  p.cov2d(0, 0) += kCovDilation;
  p.cov2d(1, 1) += kCovDilation;

  double a = p.cov2d(0, 0), b = p.cov2d(0, 1), c = p.cov2d(1, 1);
  double mid = 0.5 * (a + c);
  double disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
  double radius = 3.0 * std::sqrt(mid + disc);

  double x_lo = std::floor(p.mean2d[0] - radius), x_hi = std::ceil(p.mean2d[0] + radius);
  double y_lo = std::floor(p.mean2d[1] - radius), y_hi = std::ceil(p.mean2d[1] + radius);
  if (x_hi < 0.0 || y_hi < 0.0 || x_lo > camera.width - 1.0 || y_lo > camera.height - 1.0)
    return std::nullopt;
  p.x0 = int(std::max(0.0, x_lo));
  p.x1 = int(std::min(double(camera.width - 1), x_hi));
  p.y0 = int(std::max(0.0, y_lo));
  p.y1 = int(std::min(double(camera.height - 1), y_hi));

  double det = a * c - b * b;  // >= kCovDilation^2 since cov2d - dilation is PSD
  p.inv_a = c / det;
  p.inv_b = -b / det;
  p.inv_c = a / det;
  p.alpha = sigmoid(splat.opacity_logit);
  // Conservative Mahalanobis^2 cutoff: beyond it alpha*g < kWeightFloor with
  // slack, so the exact floor test below can never disagree.
  p.q_skip = p.alpha * 255.0 > 1.0
                 ? 2.0 * std::log(255.0 * p.alpha) + 1e-6
                 : -1.0;
  p.color = splat.color;
  return p;
}

namespace {

struct ProjectedView {
  std::vector<Projected2D> projs;          // depth-sorted, ties by splat index
  std::vector<std::vector<int32_t>> rows;  // per image row: indices into projs
};

ProjectedView project_view(const GaussianCloud& cloud, const Camera& cam) {
  ProjectedView view;
  view.projs.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (auto p = project(cloud.splats[i], cam, int(i))) view.projs.push_back(*p);
  std::sort(view.projs.begin(), view.projs.end(),
            [](const Projected2D& a, const Projected2D& b) {
              if (a.depth != b.depth) return a.depth < b.depth;
              return a.splat_index < b.splat_index;
            });
  view.rows.resize(cam.height);
  for (std::size_t k = 0; k < view.projs.size(); ++k) {
    const Projected2D& p = view.projs[k];
    for (int y = p.y0; y <= p.y1; ++y) view.rows[y].push_back(int32_t(k));
  }
  return view;
}

// Front-to-back march over one pixel. on_accept(k, dx, dy, g, w, T) fires for
// every blended splat, in blend order. Returns the final transmittance.
template <class OnAccept>
double march_pixel(const std::vector<Projected2D>& projs,
                   const std::vector<int32_t>& row, int x, int y,
                   OnAccept&& on_accept) {
  double T = 1.0;
  for (int32_t k : row) {
    const Projected2D& p = projs[k];
    if (x < p.x0 || x > p.x1) continue;
    double dx = x - p.mean2d[0], dy = y - p.mean2d[1];
    double q = p.inv_a * dx * dx + 2.0 * p.inv_b * dx * dy + p.inv_c * dy * dy;
    if (q > p.q_skip) continue;
    double g = std::exp(-0.5 * q);
    double w = std::min(p.alpha * g, kWeightClamp);
    if (w < kWeightFloor) continue;
    double contrib = w * T;
    if (contrib <= kContribFloor) continue;
    double test_T = T * (1.0 - w);
    if (test_T < kTransmitFloor) break;  // terminal splat is not blended
    on_accept(k, dx, dy, g, w, T);
    T = test_T;
  }
  return T;
}

}  // namespace

RenderOutput render(const GaussianCloud& cloud, const Camera& camera,
                    const Eigen::Vector3d& background) {
  RenderOutput out;
  out.image = ImageBuffer{camera.width, camera.height};
  out.per_splat_hits.assign(cloud.size(), 0);
  out.per_pixel_contributor_count.assign(std::size_t(camera.width) * camera.height, 0);

  ProjectedView view = project_view(cloud, camera);
  for (int y = 0; y < camera.height; ++y) {
    const auto& row = view.rows[y];
    for (int x = 0; x < camera.width; ++x) {
      Eigen::Vector3d c = Eigen::Vector3d::Zero();
      int count = 0;
      double T = march_pixel(view.projs, row, x, y,
                             [&](int32_t k, double, double, double, double w, double Tcur) {
                               const Projected2D& p = view.projs[k];
                               c += p.color * (w * Tcur);
                               ++out.per_splat_hits[p.splat_index];
                               ++count;
                             });
      c += T * background;
      for (int ch = 0; ch < 3; ++ch) out.image.at(y, x, ch) = c[ch];
      out.per_pixel_contributor_count[std::size_t(y) * camera.width + x] = count;
    }
  }
  return out;
}

void GradientBundle::resize(std::size_t n) {
  d_position.assign(n, Eigen::Vector3d::Zero());
  d_log_scales.assign(n, Eigen::Vector3d::Zero());
  d_rotation.assign(n, Eigen::Vector4d::Zero());
  d_color.assign(n, Eigen::Vector3d::Zero());
  d_opacity_logit.assign(n, 0.0);
  d_mean2d.assign(n, Eigen::Vector2d::Zero());
  visible.assign(n, 0);
}

void GradientBundle::add(const GradientBundle& other) {
  if (other.size() != size()) throw std::invalid_argument("GradientBundle size mismatch");
  for (std::size_t i = 0; i < size(); ++i) {
    d_position[i] += other.d_position[i];
    d_log_scales[i] += other.d_log_scales[i];
    d_rotation[i] += other.d_rotation[i];
    d_color[i] += other.d_color[i];
    d_opacity_logit[i] += other.d_opacity_logit[i];
    d_mean2d[i] += other.d_mean2d[i];
    visible[i] = uint8_t(visible[i] | other.visible[i]);
  }
}

namespace {

struct SplatAccum {
  double du = 0.0, dv = 0.0;            // d/d mean2d
  double daa = 0.0, dab = 0.0, dcc = 0.0;  // d/d cov2d (symmetric)
  double dalpha = 0.0;
  Eigen::Vector3d dcolor = Eigen::Vector3d::Zero();
  bool touched = false;
};

struct Accepted {
  int32_t k;
  double dx, dy, g, w, T;
};

// d(rotation matrix)/d(unit quaternion component), rows stacked per component.
void quat_rotation_derivatives(const Eigen::Vector4d& q, Eigen::Matrix3d out[4]) {
  double w = q[0], x = q[1], y = q[2], z = q[3];
  out[0] << 0, -z, y, z, 0, -x, -y, x, 0;
  out[1] << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  out[2] << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  out[3] << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
  for (int i = 0; i < 4; ++i) out[i] *= 2.0;
}

}  // namespace

GradientBundle render_backward(const GaussianCloud& cloud, const Camera& camera,
                               const ImageBuffer& d_loss_d_image,
                               const Eigen::Vector3d& background) {
  if (d_loss_d_image.width != camera.width || d_loss_d_image.height != camera.height)
    throw std::invalid_argument("render_backward: upstream gradient size mismatch");
  if (!all_finite(d_loss_d_image))
    throw std::invalid_argument("render_backward: non-finite upstream gradient");

  GradientBundle bundle;
  bundle.resize(cloud.size());
  ProjectedView view = project_view(cloud, camera);
  for (const Projected2D& p : view.projs) bundle.visible[p.splat_index] = 1;

  std::vector<SplatAccum> accum(view.projs.size());
  std::vector<Accepted> seq;
  seq.reserve(256);

  for (int y = 0; y < camera.height; ++y) {
    const auto& row = view.rows[y];
    for (int x = 0; x < camera.width; ++x) {
      Eigen::Vector3d U(d_loss_d_image.at(y, x, 0), d_loss_d_image.at(y, x, 1),
                        d_loss_d_image.at(y, x, 2));
      seq.clear();
      double T_final = march_pixel(view.projs, row, x, y,
                                   [&](int32_t k, double dx, double dy, double g,
                                       double w, double T) {
                                     seq.push_back({k, dx, dy, g, w, T});
                                   });
      if (seq.empty() || U.isZero(0.0)) continue;

      // Suffix color behind each blended splat, walked back-to-front.
      Eigen::Vector3d S = T_final * background;
      for (std::size_t i = seq.size(); i-- > 0;) {
        const Accepted& a = seq[i];
        const Projected2D& p = view.projs[a.k];
        SplatAccum& acc = accum[a.k];
        acc.touched = true;

        double wT = a.w * a.T;
        double dLdw = U.dot(p.color * a.T - S / (1.0 - a.w));
        acc.dcolor += U * wT;
        if (p.alpha * a.g < kWeightClamp) {  // clamp kills dw/dalpha, dw/dg
          acc.dalpha += dLdw * a.g;
          double dLdg = dLdw * p.alpha;
          double ex = p.inv_a * a.dx + p.inv_b * a.dy;
          double ey = p.inv_b * a.dx + p.inv_c * a.dy;
          double dg = dLdg * a.g;
          acc.du += dg * ex;
          acc.dv += dg * ey;
          double f = 0.5 * dg;
          acc.daa += f * ex * ex;
          acc.dab += f * ex * ey;
          acc.dcc += f * ey * ey;
        }
        S += p.color * wT;
      }
    }
  }

  // Chain screen-space gradients back to splat parameters.
  for (std::size_t k = 0; k < view.projs.size(); ++k) {
    const SplatAccum& acc = accum[k];
    if (!acc.touched) continue;
    const Projected2D& p = view.projs[k];
    const GaussianSplat& s = cloud.splats[p.splat_index];
    int idx = p.splat_index;

    bundle.d_color[idx] = acc.dcolor;
    bundle.d_opacity_logit[idx] = acc.dalpha * p.alpha * (1.0 - p.alpha);
    bundle.d_mean2d[idx] << acc.du, acc.dv;

    ViewGeometry geo = view_geometry(s, camera);
    double xc = geo.p_cam[0], yc = geo.p_cam[1], z = geo.p_cam[2];
    Eigen::Matrix2d G2;
    G2 << acc.daa, acc.dab, acc.dab, acc.dcc;

    Eigen::Matrix3d sigma = world_covariance(s);
    Eigen::Matrix3d D = geo.A.transpose() * G2 * geo.A;          // d/d sigma
    Eigen::Matrix<double, 2, 3> dA = 2.0 * G2 * geo.A * sigma;
    Eigen::Matrix<double, 2, 3> dJ = dA * camera.rotation.transpose();

    double fx = camera.fx, fy = camera.fy, z2 = z * z, z3 = z2 * z;
    Eigen::Vector3d d_pcam;
    d_pcam[0] = acc.du * fx / z + dJ(0, 2) * (-fx / z2);
    d_pcam[1] = acc.dv * fy / z + dJ(1, 2) * (-fy / z2);
    d_pcam[2] = acc.du * (-fx * xc / z2) + acc.dv * (-fy * yc / z2) +
                dJ(0, 0) * (-fx / z2) + dJ(1, 1) * (-fy / z2) +
                dJ(0, 2) * (2.0 * fx * xc / z3) + dJ(1, 2) * (2.0 * fy * yc / z3);
    bundle.d_position[idx] = camera.rotation.transpose() * d_pcam;

    double norm = s.rotation.norm();
    Eigen::Vector4d qh = s.rotation / norm;
    Eigen::Matrix3d R = rotation_from_quat(s.rotation);
    Eigen::Vector3d sc = s.log_scales.array().exp();
    Eigen::Matrix3d dM = 2.0 * D * R * sc.asDiagonal();  // M = R*diag(sc)
    Eigen::Matrix3d RtdM = R.transpose() * dM;
    for (int kk = 0; kk < 3; ++kk)
      bundle.d_log_scales[idx][kk] = sc[kk] * RtdM(kk, kk);

    Eigen::Matrix3d dR = dM * sc.asDiagonal();
    Eigen::Matrix3d dRdq[4];
    quat_rotation_derivatives(qh, dRdq);
    Eigen::Vector4d d_qhat;
    for (int c = 0; c < 4; ++c) d_qhat[c] = (dR.array() * dRdq[c].array()).sum();
    bundle.d_rotation[idx] =
        (Eigen::Matrix4d::Identity() - qh * qh.transpose()) * d_qhat / norm;
  }
  return bundle;
}

}  // namespace gsd
