#ifndef POLARITON_GREENS_HPP
#define POLARITON_GREENS_HPP

#include <Eigen/Dense>

#include "polariton/propagators.hpp"

namespace polariton {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat3c = Eigen::Matrix3cd;

enum class DyadicKind { G, S, G_perp, G_par };

struct DyadicSample {
  Vec3 x;
  Vec3 xp;
  complex omega;
  Mat3c tensor;
  DyadicKind kind;
};

// One plane-wave mode of the Born-von-Karman box: Phi = e^{ik.x}/sqrt(V),
// two transverse polarizations eps1, eps2 orthogonal to k.
struct ModeIndex {
  Eigen::Vector3i n;
  Vec3 k;
  double omega_alpha;  // c|k| with c = 1
  Vec3 eps1;
  Vec3 eps2;
};

struct BoxModeBasis {
  double L;
  double k_max;
  std::vector<ModeIndex> modes;

  BoxModeBasis(double side, double cutoff) : L(side), k_max(cutoff) {
    if (!(side > 0.0) || !(cutoff > 0.0))
      throw validation_error("BoxModeBasis requires L, k_max > 0");
    const double dk = 2.0 * pi / L;
    const int nmax = static_cast<int>(std::floor(k_max / dk));
    for (int nx = -nmax; nx <= nmax; ++nx)
      for (int ny = -nmax; ny <= nmax; ++ny)
        for (int nz = -nmax; nz <= nmax; ++nz) {
          if (nx == 0 && ny == 0 && nz == 0) continue;  // zero mode excluded
          const Vec3 k(dk * nx, dk * ny, dk * nz);
          if (k.norm() > k_max) continue;
          ModeIndex m;
          m.n = Eigen::Vector3i(nx, ny, nz);
          m.k = k;
          m.omega_alpha = k.norm();
          const Vec3 khat = k.normalized();
          Vec3 e1 = khat.cross(Vec3::UnitZ());
          if (e1.norm() < 1e-12) e1 = Vec3::UnitX();
          m.eps1 = e1.normalized();
          m.eps2 = khat.cross(m.eps1);
          modes.push_back(m);
        }
  }

  double volume() const { return L * L * L; }

  complex phi(const ModeIndex& m, const Vec3& x) const {
    return std::exp(complex(0.0, m.k.dot(x))) / std::sqrt(volume());
  }
};

// Per-mode dyads of the homogeneous-medium expansion at frequency omega:
// transverse G, longitudinal G, the S kernel, and the projector (delta) parts.
struct ModeDyads {
  Mat3c G_perp;
  Mat3c G_par;
  Mat3c S;
  Mat3c delta_perp;
  Mat3c delta_par;
};

inline ModeDyads mode_dyads(const BoxModeBasis& basis, const ModeIndex& m,
                            const Medium& medium, const Vec3& x, const Vec3& xp,
                            complex omega) {
  const complex eps = epsilon(medium, omega);
  const complex ew2 = eps * omega * omega;
  const complex pp = basis.phi(m, x) * std::conj(basis.phi(m, xp));
  const Vec3 khat = m.k.normalized();
  const Mat3 trans = m.eps1 * m.eps1.transpose() + m.eps2 * m.eps2.transpose();
  const Mat3 lon = khat * khat.transpose();
  ModeDyads d;
  d.delta_perp = pp * trans.cast<complex>();
  d.delta_par = pp * lon.cast<complex>();
  d.G_perp = pp / (m.omega_alpha * m.omega_alpha - ew2) * trans.cast<complex>();
  d.G_par = -pp / ew2 * lon.cast<complex>();
  d.S = pp * m.omega_alpha * m.omega_alpha /
        (m.omega_alpha * m.omega_alpha - ew2) * trans.cast<complex>();
  return d;
}

// Mode sums of the transverse and longitudinal Green dyads. The longitudinal
// projector sum only converges as a distribution: pointwise partial sums
// oscillate with amplitude growing like k_max^2. For pointwise evaluation
// pass filter_kc > 0 to weight each mode by exp(-k^2/(2 kc^2)); the filtered
// sum approaches the closed form smeared over a length 1/kc. Truncation
// bound at separation r: relative error O(1/(kc r)^2) from the smearing,
// plus O((r/L)^3) periodic images, provided k_max >= 4 kc so the hard edge
// sits where the filter is already negligible.
inline std::pair<DyadicSample, DyadicSample> planewave_split(
    const BoxModeBasis& basis, const Medium& medium, const Vec3& x,
    const Vec3& xp, complex omega, double filter_kc = 0.0) {
  DyadicSample gp{x, xp, omega, Mat3c::Zero(), DyadicKind::G_perp};
  DyadicSample gl{x, xp, omega, Mat3c::Zero(), DyadicKind::G_par};
  for (const auto& m : basis.modes) {
    const auto d = mode_dyads(basis, m, medium, x, xp, omega);
    const double wgt =
        filter_kc > 0.0
            ? std::exp(-m.k.squaredNorm() / (2.0 * filter_kc * filter_kc))
            : 1.0;
    gp.tensor += wgt * d.G_perp;
    gl.tensor += wgt * d.G_par;
  }
  return {gp, gl};
}

// Closed-form homogeneous Green dyad [I - grad grad/(eps w^2)] g(R),
// g = e^{ikR}/(4 pi R), k = w sqrt(eps) on the decaying branch.
inline DyadicSample g_dyadic_homogeneous(const Medium& medium, const Vec3& x,
                                         const Vec3& xp, complex omega,
                                         double min_separation = 0.0) {
  const Vec3 d = x - xp;
  const double R = d.norm();
  if (!(R > 0.0)) throw validation_error("g_dyadic_homogeneous requires x != x'");
  if (R < min_separation)
    throw validation_error("point pair inside the regularization radius");
  const complex eps = epsilon(medium, omega);
  if (eps.imag() == 0.0 && eps.real() < 0.0)
    throw branch_error("eps on the negative real axis: branch ambiguous");
  const complex k = omega * std::sqrt(eps);
  const complex kR = k * R;
  const complex kR2 = kR * kR;
  const complex i(0.0, 1.0);
  const complex g = scalar_green(medium, R, omega);
  const Vec3 rh = d / R;
  const Mat3 rr = rh * rh.transpose();
  const complex a = 1.0 + (i * kR - 1.0) / kR2;
  const complex b = (3.0 - 3.0 * i * kR - kR2) / kR2;
  DyadicSample s;
  s.x = x;
  s.xp = xp;
  s.omega = omega;
  s.kind = DyadicKind::G;
  s.tensor = g * (a * Mat3c::Identity() + b * rr.cast<complex>());
  return s;
}

// ---- depolarization dyad -------------------------------------------------

struct ExclusionShape {
  enum class Kind { sphere, box } kind;
  double radius = 0.0;  // sphere
  Vec3 half = Vec3::Zero();  // box half-extents

  static ExclusionShape sphere(double r) { return {Kind::sphere, r, Vec3::Zero()}; }
  static ExclusionShape box(const Vec3& half_extents) {
    return {Kind::box, 0.0, half_extents};
  }
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

// adaptive Simpson for matrix-valued integrands
template <typename F>
Mat3 simpson_mat(const F& f, double a, double b, const Mat3& fa, const Mat3& fm,
                 const Mat3& fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const Mat3 flm = f(0.5 * (a + m));
  const Mat3 frm = f(0.5 * (m + b));
  const Mat3 whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const Mat3 left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Mat3 right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Mat3 delta = left + right - whole;
  if (depth <= 0 || delta.cwiseAbs().maxCoeff() < 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_mat(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         simpson_mat(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

template <typename F>
Mat3 integrate_mat(const F& f, double a, double b, double tol) {
  return simpson_mat(f, a, b, f(a), f(0.5 * (a + b)), f(b), tol, 24);
}

// one rectangular face u in [-ua, ua], v in [-va, va] at offset h along nhat;
// contributes nhat (x) Rhat/(4 pi R^2) integrated over the face
inline Mat3 box_face_dyad(const Vec3& nhat, const Vec3& uhat, const Vec3& vhat,
                          double ua, double va, double h) {
  const auto row = [&](double u) {
    const auto g = [&](double v) -> Mat3 {
      const Vec3 R = h * nhat + u * uhat + v * vhat;
      const double r = R.norm();
      return nhat * R.transpose() / (4.0 * pi * r * r * r);
    };
    return integrate_mat(g, -va, va, 1e-11 / (2.0 * ua));
  };
  return integrate_mat(row, -ua, ua, 1e-10);
}

}  // namespace detail

// L = surface integral of nhat (x) Rhat / (4 pi R^2) over the exclusion shape.
inline Mat3 depolarization_dyad(const ExclusionShape& shape) {
  if (shape.kind == ExclusionShape::Kind::sphere) {
    if (!(shape.radius > 0.0))
      throw validation_error("sphere exclusion requires radius > 0");
    // product quadrature in (cos theta, phi); nhat = Rhat on the sphere
    std::vector<double> xs, ws;
    detail::gauss_legendre(16, xs, ws);
    const int nphi = 32;
    Mat3 L = Mat3::Zero();
    for (int i = 0; i < 16; ++i) {
      const double c = xs[i], s = std::sqrt(1.0 - c * c);
      for (int j = 0; j < nphi; ++j) {
        const double phi = 2.0 * pi * j / nphi;
        const Vec3 r(s * std::cos(phi), s * std::sin(phi), c);
        L += ws[i] * (2.0 * pi / nphi) / (4.0 * pi) * (r * r.transpose());
      }
    }
    return L;
  }
  const Vec3& h = shape.half;
  if (!(h.minCoeff() > 0.0))
    throw validation_error("box exclusion requires positive half-extents");
  Mat3 L = Mat3::Zero();
  const Vec3 ax[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (int a = 0; a < 3; ++a) {
    const int u = (a + 1) % 3, v = (a + 2) % 3;
    const Mat3 face = detail::box_face_dyad(ax[a], ax[u], ax[v], h[u], h[v], h[a]);
    // opposite face: nhat -> -nhat, R_n -> -R_n; tangential parts cancel
    const Mat3 facem = detail::box_face_dyad(-ax[a], ax[u], ax[v], h[u], h[v], h[a]);
    L += face + facem;
  }
  return L;
}

// ---- vacuum time propagators ----------------------------------------------

struct VacuumKernels {
  Mat3c Q;       // sum w_a sin(w_a tau) Phi Phi* (perp projector)
  Mat3c U_perp;  // sum sin(w_a tau)/w_a
  Mat3c U_par;   // tau * (parallel delta dyad)
  Mat3c dU;      // d/dtau of U_perp + U_par
};

inline VacuumKernels vacuum_time_propagators(const BoxModeBasis& basis,
                                             double tau, const Vec3& x,
                                             const Vec3& xp) {
  VacuumKernels k;
  k.Q = Mat3c::Zero();
  k.U_perp = Mat3c::Zero();
  k.U_par = Mat3c::Zero();
  k.dU = Mat3c::Zero();
  for (const auto& m : basis.modes) {
    const complex pp = basis.phi(m, x) * std::conj(basis.phi(m, xp));
    const Vec3 khat = m.k.normalized();
    const Mat3 trans = m.eps1 * m.eps1.transpose() + m.eps2 * m.eps2.transpose();
    const Mat3 lon = khat * khat.transpose();
    const double wa = m.omega_alpha;
    k.Q += pp * wa * std::sin(wa * tau) * trans.cast<complex>();
    k.U_perp += pp * std::sin(wa * tau) / wa * trans.cast<complex>();
    k.U_par += pp * tau * lon.cast<complex>();
    k.dU += pp * (std::cos(wa * tau) * trans.cast<complex>() + lon.cast<complex>());
  }
  return k;
}

// discretized delta dyad of the (truncated) basis at a point pair
inline Mat3c basis_delta_dyad(const BoxModeBasis& basis, const Vec3& x,
                              const Vec3& xp) {
  Mat3c d = Mat3c::Zero();
  for (const auto& m : basis.modes)
    d += basis.phi(m, x) * std::conj(basis.phi(m, xp)) * Mat3c::Identity();
  return d;
}

// ---- Lippmann-Schwinger ----------------------------------------------------

struct GridCell {
  Eigen::Vector3i idx;
  Medium medium;
};

struct ScattererGrid {
  double dx = 0.0;
  std::vector<GridCell> cells;

  Vec3 position(std::size_t c) const { return dx * cells[c].idx.cast<double>(); }
  double cell_volume() const { return dx * dx * dx; }
};

struct singular_system_error : std::runtime_error {
  double rcond;
  explicit singular_system_error(const std::string& msg, double rc)
      : std::runtime_error(msg), rcond(rc) {}
};

// Dense coupled-dipole solution of the discretized Lippmann-Schwinger
// equation G = G_b + w^2 G_b chi V G, with the regularized self term
// G_b(c,c) = -L/(eps_b w^2 V), L = I/3 (spherical exclusion).
class LippmannSchwingerOperator {
 public:
  // homogeneous background
  LippmannSchwingerOperator(const ScattererGrid& grid, const Medium& background,
                            complex omega)
      : grid_(grid), background_(background), omega_(omega) {
    const std::size_t n = grid.cells.size();
    Eigen::MatrixXcd gb(3 * n, 3 * n);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t d = 0; d < n; ++d)
        gb.block<3, 3>(3 * c, 3 * d) = background_pair(c, d);
    assemble(gb);
  }

  // another solved operator as background (two-step solve); the grids must
  // share cell geometry
  LippmannSchwingerOperator(const ScattererGrid& grid,
                            const LippmannSchwingerOperator& background)
      : grid_(grid),
        background_(background.background_),
        omega_(background.omega_),
        inner_(&background) {
    const std::size_t n = grid.cells.size();
    if (background.grid_.cells.size() != n || background.grid_.dx != grid.dx)
      throw validation_error("two-step solve requires matching grids");
    Eigen::MatrixXcd gb(3 * n, 3 * n);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t d = 0; d < n; ++d)
        gb.block<3, 3>(3 * c, 3 * d) = background.cell_pair(c, d);
    assemble(gb);
  }

  complex omega() const { return omega_; }
  const ScattererGrid& grid() const { return grid_; }

  // G_chi at a cell pair (self value is the regularized one)
  Mat3c cell_pair(std::size_t c, std::size_t d) const {
    return gchi_.block<3, 3>(3 * c, 3 * d);
  }

  // G_chi(x, x_d) with x away from the cells
  Mat3c point_cell(const Vec3& x, std::size_t d) const {
    Mat3c g = background_green(x, grid_.position(d));
    const complex w2 = omega_ * omega_;
    const double V = grid_.cell_volume();
    for (std::size_t e = 0; e < grid_.cells.size(); ++e)
      g += w2 * background_green(x, grid_.position(e)) * chi_[e] * V *
           cell_pair(e, d);
    return g;
  }

  // G_chi(x, x') with both points away from the grid cells
  Mat3c exterior(const Vec3& x, const Vec3& xp) const {
    const std::size_t n = grid_.cells.size();
    Eigen::MatrixXcd rhs(3 * n, 3);
    for (std::size_t e = 0; e < n; ++e)
      rhs.block<3, 3>(3 * e, 0) = background_green(grid_.position(e), xp);
    const Eigen::MatrixXcd y = lu_.solve(rhs);
    Mat3c g = background_green(x, xp);
    const complex w2 = omega_ * omega_;
    const double V = grid_.cell_volume();
    for (std::size_t e = 0; e < n; ++e)
      g += w2 * background_green(x, grid_.position(e)) * chi_[e] * V *
           y.block<3, 3>(3 * e, 0);
    return g;
  }

  // dispatch on coincidence with cell centers
  Mat3c query(const Vec3& x, const Vec3& xp) const {
    const auto cell_at = [&](const Vec3& p) -> long {
      for (std::size_t c = 0; c < grid_.cells.size(); ++c)
        if ((grid_.position(c) - p).norm() < 1e-12 * (1.0 + p.norm()))
          return static_cast<long>(c);
      return -1;
    };
    const long c = cell_at(x), d = cell_at(xp);
    if (c >= 0 && d >= 0) return cell_pair(c, d);
    if (d >= 0) return point_cell(x, d);
    if (c >= 0) return point_cell(xp, c).transpose();  // reciprocity
    return exterior(x, xp);
  }

 private:
  void assemble(const Eigen::MatrixXcd& gb) {
    const std::size_t n = grid_.cells.size();
    chi_.resize(n);
    const complex eps_b = epsilon(background_, omega_);
    for (std::size_t c = 0; c < n; ++c)
      chi_[c] = epsilon(grid_.cells[c].medium, omega_) - eps_b -
                (inner_ ? inner_->chi_total(c) : complex(0.0));
    const complex w2 = omega_ * omega_;
    const double V = grid_.cell_volume();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(3 * n, 3 * n);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t d = 0; d < n; ++d)
        A.block<3, 3>(3 * c, 3 * d) -= w2 * gb.block<3, 3>(3 * c, 3 * d) *
                                       chi_[d] * V;
    lu_.compute(A);
    const double rc = lu_.rcond();
    if (!(rc > 1e-14))
      throw singular_system_error("Lippmann-Schwinger system near-singular", rc);
    gchi_ = lu_.solve(gb);
  }

  // contrast of this operator's cells relative to the homogeneous background,
  // including any inner layers
  complex chi_total(std::size_t c) const {
    return chi_[c] + (inner_ ? inner_->chi_total(c) : complex(0.0));
  }

  Mat3c background_pair(std::size_t c, std::size_t d) const {
    if (c == d) {
      const complex eps_b = epsilon(background_, omega_);
      return -Mat3c::Identity() /
             (3.0 * eps_b * omega_ * omega_ * grid_.cell_volume());
    }
    return g_dyadic_homogeneous(background_, grid_.position(c),
                                grid_.position(d), omega_)
        .tensor;
  }

  // background Green value at arbitrary points (cell centers allowed when the
  // background is itself a solved operator)
  Mat3c background_green(const Vec3& x, const Vec3& xp) const {
    if (inner_) return inner_->query(x, xp);
    return g_dyadic_homogeneous(background_, x, xp, omega_).tensor;
  }

  ScattererGrid grid_;
  Medium background_;
  complex omega_;
  const LippmannSchwingerOperator* inner_ = nullptr;
  std::vector<complex> chi_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  Eigen::MatrixXcd gchi_;
};

inline LippmannSchwingerOperator lippmann_schwinger_solve(
    const ScattererGrid& grid, const Medium& background, complex omega) {
  if (grid.cells.size() > 4000)
    throw validation_error("dense solve capped at 4000 cells");
  if (!(grid.dx > 0.0)) throw validation_error("grid requires dx > 0");
  return LippmannSchwingerOperator(grid, background, omega);
}

}  // namespace polariton

#endif
