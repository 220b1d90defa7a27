#include "nanofiber/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nanofiber {

namespace {

Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& residual,
                                           const Eigen::VectorXd& x,
                                           Eigen::Index n_residuals) {
  Eigen::MatrixXd jac(n_residuals, x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = 1e-6 * std::max(1.0, std::abs(x(j)));
    Eigen::VectorXd hi = x, lo = x;
    hi(j) += step;
    lo(j) -= step;
    jac.col(j) = (residual(hi) - residual(lo)) / (2.0 * step);
  }
  return jac;
}

}  // namespace

double FitResult::parameter(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return parameters(static_cast<Eigen::Index>(i));
  throw std::out_of_range("unknown fit parameter: " + name);
}

double FitResult::uncertainty(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return uncertainties(static_cast<Eigen::Index>(i));
  throw std::out_of_range("unknown fit parameter: " + name);
}

FitResult least_squares_solve(const ResidualFn& residual, const Eigen::VectorXd& x0,
                              const LsqOptions& options, const JacobianFn& jacobian) {
  FitResult result;
  result.names = options.parameter_names;
  for (Eigen::Index i = static_cast<Eigen::Index>(result.names.size()); i < x0.size(); ++i)
    result.names.push_back("p" + std::to_string(i));

  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = residual(x);
  if (!r.allFinite()) {
    result.parameters = x;
    result.uncertainties = Eigen::VectorXd::Zero(x.size());
    result.covariance = Eigen::MatrixXd::Zero(x.size(), x.size());
    result.status = "non-finite residual at the initial point";
    return result;
  }
  double cost = 0.5 * r.squaredNorm();
  double damping = options.initial_damping;
  std::string status = "max iterations reached";
  bool converged = false;
  int iter = 0;

  Eigen::MatrixXd jac;
  bool jac_fresh = false;
  for (; iter < options.max_iterations; ++iter) {
    if (!jac_fresh)
      jac = jacobian ? jacobian(x) : finite_difference_jacobian(residual, x, r.size());
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * r;

    if (gradient.lpNorm<Eigen::Infinity>() < options.gradient_tol) {
      converged = true;
      status = "gradient below tolerance";
      break;
    }

    // Rank check on the normal equations.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smax > 0.0) || smin < 1e-14 * smax) {
      status = "rank-deficient normal equations";
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal() += damping * normal.diagonal();
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      const Eigen::VectorXd x_try = x + step;
      const Eigen::VectorXd r_try = residual(x_try);
      if (r_try.allFinite()) {
        const double cost_try = 0.5 * r_try.squaredNorm();
        if (cost_try <= cost) {
          const bool tiny_step =
              step.norm() < options.step_tol * (x.norm() + options.step_tol);
          x = x_try;
          r = r_try;
          cost = cost_try;
          damping = damping < 1e-12 ? 0.0 : damping / 3.0;
          accepted = true;
          jac_fresh = false;
          if (tiny_step) {
            converged = true;
            status = "step below tolerance";
          }
          break;
        }
      }
      damping = damping == 0.0 ? 1e-4 : damping * 10.0;
      jac_fresh = true;  // same Jacobian, larger damping
      if (damping > 1e12) break;
    }
    if (converged) break;
    if (!accepted) {
      status = "no acceptable step (damping exhausted)";
      break;
    }
  }

  result.parameters = x;
  result.converged = converged;
  result.iterations = iter;
  result.status = status;
  result.points_used = static_cast<int>(r.size());
  result.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));

  jac = jacobian ? jacobian(x) : finite_difference_jacobian(residual, x, r.size());
  const Eigen::MatrixXd normal = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  if (lu.isInvertible()) {
    result.covariance = lu.inverse();
    result.uncertainties = result.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    result.covariance = Eigen::MatrixXd::Zero(x.size(), x.size());
    result.uncertainties = Eigen::VectorXd::Zero(x.size());
    result.converged = false;
    result.status = "rank-deficient normal equations";
  }
  return result;
}

namespace {

// Model phase and its analytic Jacobian w.r.t. {phi_max, offset}.
Eigen::ArrayXd model_phase(const LineSystem& base, const Eigen::ArrayXd& nu,
                           double phi_max, double offset) {
  LineSystem sys = base;
  sys.phi_max = phi_max;
  sys.global_offset_mhz = offset;
  return dispersive_phase(sys, nu);
}

}  // namespace

Eigen::MatrixXd spectrum_model_jacobian(const LineSystem& model,
                                        const Eigen::ArrayXd& detuning_mhz,
                                        double phi_max, double offset_mhz) {
  Eigen::MatrixXd jac(detuning_mhz.size(), 2);
  for (Eigen::Index i = 0; i < detuning_mhz.size(); ++i) {
    double shape = 0.0, dshape_doffset = 0.0;
    for (const auto& line : model.lines) {
      const double d = 2.0 * (detuning_mhz(i) - line.frequency_offset_mhz - offset_mhz) /
                       model.gamma_mhz;
      const double denom = d * d + 1.0;
      shape += 2.0 * line.strength_ratio * d / denom;
      dshape_doffset += 2.0 * line.strength_ratio * (1.0 - d * d) / (denom * denom) *
                        (-2.0 / model.gamma_mhz);
    }
    // model = -phi_max * shape
    jac(i, 0) = -shape;
    jac(i, 1) = -phi_max * dshape_doffset;
  }
  return jac;
}

namespace {

double far_wing_baseline(const SpectrumScan& scan) {
  // Median of the total detected power over the outer 10% of the grid.
  const Eigen::Index n = scan.size();
  const Eigen::Index edge = std::max<Eigen::Index>(2, n / 10);
  std::vector<double> edges;
  for (Eigen::Index i = 0; i < edge; ++i) {
    edges.push_back(scan.p_plus_w(i) + scan.p_minus_w(i));
    edges.push_back(scan.p_plus_w(n - 1 - i) + scan.p_minus_w(n - 1 - i));
  }
  std::nth_element(edges.begin(), edges.begin() + edges.size() / 2, edges.end());
  return edges[edges.size() / 2];
}

// Masking + phase extraction. With a reference model the absorption mask and
// the per-point noise come from the model prediction (noise-independent, so
// the weighted fit stays unbiased); without one the mask falls back to the
// measured power dip and the weights stay uniform.
PhaseSpectrum extract_core(const SpectrumScan& scan, const SpectrumFitConfig& config,
                           const LineSystem* reference_model) {
  const Eigen::Index n = scan.size();
  if (n == 0) throw std::invalid_argument("empty scan");
  const Eigen::ArrayXd total = scan.p_plus_w + scan.p_minus_w;
  const double baseline = far_wing_baseline(scan);

  // Total transmission when t_par^2 hits the threshold, with the perp mode
  // tied by the asymmetry: T = (t^2 + t^(2/rho)) / 2.
  const double t2 = config.min_transmission_sq;
  const double transmission_threshold = 0.5 * (t2 + std::pow(t2, 1.0 / config.rho));

  const bool noisy_record = scan.has_noise_metadata &&
                            (scan.noise.shot_noise ||
                             scan.noise.detector_noise_rms_w > 0.0);
  const double factor = 1.0 / (1.0 - 1.0 / config.rho);
  std::vector<double> nu_v, phi_v, sig_v;
  PhaseSpectrum out;
  double prev_dphi = 0.0;
  bool have_prev = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double nu = scan.detuning_mhz(i);
    bool masked = false;
    for (const auto& [lo, hi] : config.mask_windows)
      if (nu >= lo && nu <= hi) masked = true;
    if (config.auto_absorption_mask) {
      if (reference_model) {
        const double t_par_sq = std::exp(-optical_density(*reference_model, nu));
        if (t_par_sq < config.min_transmission_sq) masked = true;
      } else if (baseline > 0.0 && total(i) < transmission_threshold * baseline) {
        masked = true;
      }
    }
    const double s3 = scan.s3_norm(i);
    if (std::abs(s3) > 1.0) masked = true;
    if (masked) {
      ++out.points_masked;
      have_prev = false;
      continue;
    }
    // Nearest-branch continuation within a contiguous unmasked segment.
    double dphi = std::asin(s3);
    if (have_prev) {
      const double alt = (dphi >= 0.0 ? constants::pi : -constants::pi) - dphi;
      if (std::abs(alt - prev_dphi) < std::abs(dphi - prev_dphi)) dphi = alt;
      if (std::abs(dphi - prev_dphi) > 0.5 * constants::pi) out.branch_flagged = true;
    }
    prev_dphi = dphi;
    have_prev = true;

    nu_v.push_back(nu);
    phi_v.push_back(factor * dphi);
    double sigma = 1.0;
    if (reference_model && noisy_record) {
      // Model-predicted detected powers at this point.
      const OpticalResponse r = response_at(*reference_model, nu, config.rho);
      const double transmission =
          0.5 * (r.t_par * r.t_par + r.t_perp * r.t_perp);
      const double s3_model = 2.0 * r.t_par * r.t_perp /
                              (r.t_par * r.t_par + r.t_perp * r.t_perp) *
                              std::sin(r.phase_difference());
      const double p_total = baseline * transmission;
      const double var_s3 = analytic_s3_variance(0.5 * p_total * (1.0 + s3_model),
                                                 0.5 * p_total * (1.0 - s3_model),
                                                 scan.probe, scan.noise);
      const double slope =
          1.0 / std::sqrt(std::max(1.0 - s3_model * s3_model, 1e-12));
      sigma = factor * slope * std::sqrt(std::max(var_s3, 0.0));
      out.weighted = true;
    }
    sig_v.push_back(sigma);
  }
  out.detuning_mhz = Eigen::Map<Eigen::ArrayXd>(nu_v.data(), nu_v.size());
  out.phi_par = Eigen::Map<Eigen::ArrayXd>(phi_v.data(), phi_v.size());
  out.sigma_phi = Eigen::Map<Eigen::ArrayXd>(sig_v.data(), sig_v.size());
  return out;
}

}  // namespace

PhaseSpectrum extract_phase_spectrum(const SpectrumScan& scan,
                                     const SpectrumFitConfig& config) {
  return extract_core(scan, config, nullptr);
}

namespace {

FitResult solve_phase_fit(const PhaseSpectrum& data, const LineSystem& model,
                          double phi_max0, double offset0) {
  const Eigen::ArrayXd inv_sigma = data.sigma_phi.inverse();
  auto residual = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return ((data.phi_par - model_phase(model, data.detuning_mhz, p(0), p(1))) *
            inv_sigma)
        .matrix();
  };
  auto jacobian = [&](const Eigen::VectorXd& p) -> Eigen::MatrixXd {
    Eigen::MatrixXd jac =
        -spectrum_model_jacobian(model, data.detuning_mhz, p(0), p(1));
    jac.array().colwise() *= inv_sigma;
    return jac;
  };
  LsqOptions options;
  options.parameter_names = {"phi_max", "offset_mhz"};
  Eigen::VectorXd x0(2);
  x0 << phi_max0, offset0;
  FitResult result = least_squares_solve(residual, x0, options, jacobian);
  result.points_used = static_cast<int>(data.detuning_mhz.size());
  result.points_masked = data.points_masked;
  if (data.branch_flagged)
    result.warnings.push_back("phase continuation step exceeded pi/2");
  if (!data.weighted) {
    // Uniform weights: scale the covariance by the reduced chi^2.
    const double dof = static_cast<double>(data.detuning_mhz.size() - 2);
    const double s2 = residual(result.parameters).squaredNorm() / dof;
    result.covariance *= s2;
    result.uncertainties = result.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  }
  return result;
}

}  // namespace

FitResult fit_spectrum(const SpectrumScan& scan, const SpectrumFitConfig& config) {
  // Pass 1: measured-power mask, uniform weights. Gives the starting point.
  PhaseSpectrum data = extract_phase_spectrum(scan, config);
  const Eigen::Index n = data.detuning_mhz.size();
  if (n < 10) throw std::invalid_argument("fewer than 10 unmasked points");

  // Initial guesses. The peak of |phi| in the masked scan sits close to the
  // absorption-mask edge; the single-line shape there gives |phi| ~ 0.2 phi_max.
  double phi_max0 = config.phi_max_init.value_or(0.0);
  if (!config.phi_max_init) {
    const double peak = data.phi_par.abs().maxCoeff();
    phi_max0 = std::max(5.0 * peak, 1e-3);
  }
  double offset0 = config.offset_init.value_or(0.0);
  if (!config.offset_init) {
    // Measured far-wing zero crossing between F'=4 and F'=5 against the
    // model-predicted one at zero offset.
    LineSystem probe_model = config.model;
    probe_model.phi_max = 1.0;
    probe_model.global_offset_mhz = 0.0;
    double model_zc = 0.0;
    bool have_model_zc = true;
    try {
      model_zc = model_zero_crossing(probe_model, constants::line_offset_f4_mhz + 30.0, -30.0);
    } catch (const std::exception&) {
      have_model_zc = false;
    }
    if (have_model_zc) {
      // The physical crossing runs negative-to-positive with detuning; noise
      // flips in the low-signal wings can fake crossings, so keep the upward
      // one nearest the model prediction and cap the implied lock offset.
      double best = std::numeric_limits<double>::quiet_NaN();
      for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double a = data.detuning_mhz(i), b = data.detuning_mhz(i + 1);
        if (b < constants::line_offset_f4_mhz + 30.0 || a > -30.0 || b - a > 10.0)
          continue;
        const double ya = data.phi_par(i), yb = data.phi_par(i + 1);
        if (ya < 0.0 && yb >= 0.0) {
          const double crossing = a - ya * (b - a) / (yb - ya);
          if (!std::isfinite(best) ||
              std::abs(crossing - model_zc) < std::abs(best - model_zc))
            best = crossing;
        }
      }
      if (std::isfinite(best)) offset0 = std::clamp(best - model_zc, -25.0, 25.0);
    }
  }

  FitResult result = solve_phase_fit(data, config.model, phi_max0, offset0);
  if (!result.converged) return result;

  // Passes 2 and 3: re-extract with the model-OD mask and model-predicted
  // weights at the current estimate, then refit. Keeping mask and weights
  // off the measured samples removes their noise correlation with the fit.
  for (int pass = 0; pass < 2; ++pass) {
    LineSystem reference = config.model;
    reference.phi_max = result.parameter("phi_max");
    reference.global_offset_mhz = result.parameter("offset_mhz");
    const PhaseSpectrum refined = extract_core(scan, config, &reference);
    if (refined.detuning_mhz.size() < 10)
      throw std::invalid_argument("fewer than 10 unmasked points");
    result = solve_phase_fit(refined, config.model, result.parameter("phi_max"),
                             result.parameter("offset_mhz"));
    if (!result.converged) return result;
  }
  return result;
}

FitResult fit_decay(const Eigen::ArrayXd& t_s, const Eigen::ArrayXd& atoms) {
  if (t_s.size() != atoms.size()) throw std::invalid_argument("size mismatch");
  if (t_s.size() < 5) throw std::invalid_argument("need at least 5 points");
  if ((atoms <= 0.0).all())
    throw std::invalid_argument("decay data has no positive samples");

  // Log-linear regression over the positive samples for the starting point.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (Eigen::Index i = 0; i < t_s.size(); ++i) {
    if (atoms(i) <= 0.0) continue;
    const double x = t_s(i), y = std::log(atoms(i));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  const double span = t_s.maxCoeff() - t_s.minCoeff();
  const double denom = m * sxx - sx * sx;
  double tau0 = span, n00 = atoms.maxCoeff();
  if (m >= 2 && std::abs(denom) > 0.0) {
    const double slope = (m * sxy - sx * sy) / denom;
    if (slope < 0.0) tau0 = -1.0 / slope;
    n00 = std::exp((sy - slope * sx) / m);
  }

  auto residual = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return (atoms - p(0) * (-t_s / p(1)).exp()).matrix();
  };
  auto jacobian = [&](const Eigen::VectorXd& p) -> Eigen::MatrixXd {
    Eigen::MatrixXd jac(t_s.size(), 2);
    const Eigen::ArrayXd decay = (-t_s / p(1)).exp();
    jac.col(0) = (-decay).matrix();
    jac.col(1) = (-p(0) * decay * t_s / (p(1) * p(1))).matrix();
    return jac;
  };

  LsqOptions options;
  options.parameter_names = {"n0", "tau_s"};
  Eigen::VectorXd x0(2);
  x0 << n00, tau0;
  FitResult result = least_squares_solve(residual, x0, options, jacobian);

  const double dof = static_cast<double>(t_s.size() - 2);
  const double s2 = residual(result.parameters).squaredNorm() / dof;
  result.covariance *= s2;
  result.uncertainties = result.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();

  if (result.converged && span < result.parameter("tau_s")) {
    result.converged = false;
    result.status = "insufficient span: data covers less than one fitted decay constant";
  }
  return result;
}

void Calibration::validate() const {
  if (!(rho > 1.0)) throw std::invalid_argument("rho must exceed 1");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const double implied = per_atom_phi_par_slope_mrad_mhz * (1.0 - 1.0 / rho);
  if (std::abs(implied - per_atom_dphi_slope_mrad_mhz) > 1.0)
    throw std::invalid_argument(
        "slope pair inconsistent: dphi slope must equal phi_par slope * (1 - 1/rho)");
}

AtomEstimate atoms_from_phase(double dphi_rad, double detuning_mhz,
                              const Calibration& calibration) {
  const double slope_rad = calibration.per_atom_dphi_slope_mrad_mhz * 1e-3;
  AtomEstimate est;
  est.atoms = -dphi_rad * detuning_mhz / slope_rad;
  est.far_wing = std::abs(detuning_mhz) >= 10.0 * constants::natural_linewidth_mhz;
  return est;
}

double model_zero_crossing(const LineSystem& system, double lo_mhz, double hi_mhz) {
  LineSystem sys = system;
  if (sys.phi_max == 0.0) sys.phi_max = 1.0;
  double flo = dispersive_phase(sys, lo_mhz);
  double fhi = dispersive_phase(sys, hi_mhz);
  if ((flo < 0.0) == (fhi < 0.0))
    throw std::invalid_argument("no sign change in the requested window");
  double lo = lo_mhz, hi = hi_mhz;
  for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = dispersive_phase(sys, mid);
    if ((flo < 0.0) == (fmid < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace nanofiber
