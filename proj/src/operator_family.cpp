#include "apcauchy/operator_family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace apcauchy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = lo * std::exp(ratio * i / (n - 1.0));
  return out;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace

void KernelEnvelope::validate() const {
  if (!(M > 0.0) || !std::isfinite(M))
    throw std::invalid_argument("KernelEnvelope: M must be positive and finite");
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("KernelEnvelope: decay rate c must be positive and finite");
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("KernelEnvelope: beta must lie in (0, 1]");
}

double KernelEnvelope::eval(double t) const {
  if (t <= 0.0)
    throw std::domain_error("KernelEnvelope: envelope is defined for t > 0 only");
  return M * std::exp(-c * t) * std::pow(t, beta - 1.0);
}

OperatorFamily::OperatorFamily(std::string kind, int dim, KernelEnvelope env)
    : kind_(std::move(kind)), dim_(dim), env_(env) {
  if (dim_ < 1) throw std::invalid_argument("OperatorFamily: dimension must be at least 1");
  env_.validate();
}

int OperatorFamily::modal_dim() const {
  throw std::logic_error("OperatorFamily: no modal factorization available");
}
const Eigen::MatrixXcd& OperatorFamily::modal_out() const {
  throw std::logic_error("OperatorFamily: no modal factorization available");
}
const Eigen::MatrixXcd& OperatorFamily::modal_in() const {
  throw std::logic_error("OperatorFamily: no modal factorization available");
}
const Eigen::VectorXcd& OperatorFamily::modal_rates() const {
  throw std::logic_error("OperatorFamily: no modal factorization available");
}

Eigen::MatrixXd OperatorFamily::dense(double t) const {
  const Eigen::VectorXcd decay = (-t * modal_rates().array()).exp().matrix();
  return (modal_out() * decay.asDiagonal() * modal_in()).real();
}

Eigen::VectorXd OperatorFamily::apply(double t, const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw std::invalid_argument("OperatorFamily: state dimension mismatch");
  const Eigen::VectorXcd decay = (-t * modal_rates().array()).exp().matrix();
  return (modal_out() * decay.cwiseProduct(modal_in() * x.cast<std::complex<double>>())).real();
}

double OperatorFamily::operator_norm(double t) const { return spectral_norm(dense(t)); }

Eigen::MatrixXd OperatorFamily::regular_projector() const {
  throw std::logic_error("OperatorFamily: regular projector undefined, family is not a semigroup");
}

DiagonalFamily::DiagonalFamily(Eigen::VectorXd rates, Eigen::VectorXd weights, KernelEnvelope env,
                               std::string kind)
    : OperatorFamily(std::move(kind), static_cast<int>(rates.size()), env),
      rates_(std::move(rates)),
      weights_(std::move(weights)) {
  if (weights_.size() != rates_.size())
    throw std::invalid_argument("DiagonalFamily: rates and weights must have equal length");
  if (weights_.minCoeff() < 0.0)
    throw std::invalid_argument("DiagonalFamily: weights must be non-negative");
  unit_weights_ = (weights_.array() - 1.0).abs().maxCoeff() <= 1e-14;
  out_ = weights_.cast<std::complex<double>>().asDiagonal();
  in_ = Eigen::MatrixXcd::Identity(dim_, dim_);
  crates_ = rates_.cast<std::complex<double>>();
}

Eigen::VectorXd DiagonalFamily::apply(double t, const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw std::invalid_argument("DiagonalFamily: state dimension mismatch");
  return (weights_.array() * (-t * rates_.array()).exp() * x.array()).matrix();
}

double DiagonalFamily::operator_norm(double t) const {
  return (weights_.array() * (-t * rates_.array()).exp()).abs().maxCoeff();
}

Eigen::MatrixXd DiagonalFamily::regular_projector() const {
  if (!unit_weights_) return OperatorFamily::regular_projector();
  return Eigen::MatrixXd::Identity(dim_, dim_);
}

Eigen::VectorXcd DiagonalFamily::spectrum() const {
  if (!unit_weights_)
    throw std::logic_error("DiagonalFamily: generator spectrum undefined for weighted modes");
  return (-rates_).cast<std::complex<double>>();
}

OperatorFamilyPtr surrogate_family(double beta, double c, int N, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("surrogate_family: M must be positive");
  if (!(c > 0.0)) throw std::invalid_argument("surrogate_family: c must be positive");
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("surrogate_family: beta must lie in (0, 1]");

  if (beta == 1.0) {
    Eigen::VectorXd rates(1), weights(1);
    rates << c;
    weights << M;
    return std::make_shared<DiagonalFamily>(rates, weights, KernelEnvelope{M, c, 1.0},
                                            "spectral_surrogate");
  }
  if (N < 8) throw std::invalid_argument("surrogate_family: need at least 8 modes when beta < 1");

  // Mode k contributes w_k e^{-(c+lambda_k) t}; with w_k = M C lambda_k^{1-beta},
  // C = ((1-beta)/e)^{beta-1}, each mode stays below the envelope for every t
  // and touches it at t = (1-beta)/lambda_k.  Log-spaced rates bracket the
  // touch points of the working range [1e-2, 10] with a factor-4 margin.
  const double lo = (1.0 - beta) / 40.0;
  const double hi = 400.0 * (1.0 - beta);
  const double C = std::pow((1.0 - beta) / std::exp(1.0), beta - 1.0);
  Eigen::VectorXd rates(N), weights(N);
  for (int k = 0; k < N; ++k) {
    const double lambda = lo * std::pow(hi / lo, k / (N - 1.0));
    rates(k) = c + lambda;
    weights(k) = M * C * std::pow(lambda, 1.0 - beta);
  }
  KernelEnvelope env{M, c, beta};
  auto family =
      std::make_shared<DiagonalFamily>(rates, weights, env, "spectral_surrogate");

  const auto samples = log_spaced(1e-2, 10.0, 200);
  double worst_low = kInf, worst_high = 0.0;
  for (double t : samples) {
    const double ratio = family->operator_norm(t) / env.eval(t);
    worst_low = std::min(worst_low, ratio);
    worst_high = std::max(worst_high, ratio);
  }
  if (worst_high > 1.0 + 1e-9 || worst_low < 0.5) {
    std::ostringstream msg;
    msg << "surrogate_family: envelope match failed on [1e-2, 10]; measured/envelope ratios:";
    for (int i = 0; i < 6; ++i) {
      const double t = samples[static_cast<std::size_t>(i * 199 / 5)];
      msg << " (t=" << t << ", " << family->operator_norm(t) / env.eval(t) << ")";
    }
    throw std::runtime_error(msg.str());
  }
  return family;
}

namespace {

/// Degenerate semigroup from an index-1 pencil reduction.  When the reduced
/// generator is diagonalizable the modal factorization is exact; otherwise
/// apply() falls back to a dense matrix exponential per call.
class PencilFamily final : public OperatorFamily {
 public:
  PencilFamily(PencilModel model, Eigen::MatrixXd map_out, Eigen::MatrixXd map_in, bool modal_ok,
               Eigen::MatrixXcd modal_out, Eigen::MatrixXcd modal_in, Eigen::VectorXcd rates,
               KernelEnvelope env)
      : OperatorFamily("pencil", model.dim, env),
        model_(std::move(model)),
        map_out_(std::move(map_out)),
        map_in_(std::move(map_in)),
        modal_ok_(modal_ok),
        out_(std::move(modal_out)),
        in_(std::move(modal_in)),
        rates_(std::move(rates)) {}

  Eigen::VectorXd apply(double t, const Eigen::VectorXd& x) const override {
    if (x.size() != dim_) throw std::invalid_argument("PencilFamily: state dimension mismatch");
    if (model_.rank == 0) return Eigen::VectorXd::Zero(dim_);
    if (modal_ok_) return OperatorFamily::apply(t, x);
    const Eigen::MatrixXd expG = (t * model_.reduced_generator).exp();
    return map_out_ * (expG * (map_in_ * x));
  }

  double operator_norm(double t) const override {
    if (model_.rank == 0) return 0.0;
    if (modal_ok_) return OperatorFamily::operator_norm(t);
    const Eigen::MatrixXd expG = (t * model_.reduced_generator).exp();
    return spectral_norm(map_out_ * expG * map_in_);
  }

  bool has_modal() const override { return modal_ok_; }
  int modal_dim() const override {
    if (!modal_ok_) return OperatorFamily::modal_dim();
    return static_cast<int>(rates_.size());
  }
  const Eigen::MatrixXcd& modal_out() const override {
    if (!modal_ok_) return OperatorFamily::modal_out();
    return out_;
  }
  const Eigen::MatrixXcd& modal_in() const override {
    if (!modal_ok_) return OperatorFamily::modal_in();
    return in_;
  }
  const Eigen::VectorXcd& modal_rates() const override {
    if (!modal_ok_) return OperatorFamily::modal_rates();
    return rates_;
  }

  bool is_semigroup() const override { return true; }
  Eigen::MatrixXd regular_projector() const override { return model_.projector; }

 private:
  PencilModel model_;
  Eigen::MatrixXd map_out_, map_in_;
  bool modal_ok_;
  Eigen::MatrixXcd out_, in_;
  Eigen::VectorXcd rates_;
};

}  // namespace

double PencilModel::resolvent_norm(std::complex<double> lambda) const {
  Eigen::MatrixXcd pencil = lambda * B.cast<std::complex<double>>() -
                            A.cast<std::complex<double>>();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(pencil);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible())
    throw std::runtime_error("PencilModel: lambda B - A is numerically singular at the sample");
  const Eigen::MatrixXcd resolvent = B.cast<std::complex<double>>() * lu.inverse();
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(resolvent).singularValues()(0);
}

PencilSemigroup pencil_semigroup(const Eigen::MatrixXd& B, const Eigen::MatrixXd& A) {
  if (B.rows() != B.cols() || A.rows() != A.cols() || B.rows() != A.rows())
    throw std::invalid_argument("pencil_semigroup: B and A must be square and equally sized");
  if (B.rows() < 1) throw std::invalid_argument("pencil_semigroup: empty pencil");
  if (!B.allFinite() || !A.allFinite())
    throw std::invalid_argument("pencil_semigroup: matrices must be finite");
  const int d = static_cast<int>(B.rows());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double cut = sv.size() > 0 ? sv(0) * 1e-12 : 0.0;
  int r = 0;
  while (r < d && sv(r) > cut && sv(r) > 0.0) ++r;

  const Eigen::MatrixXd U_r = svd.matrixU().leftCols(r);
  const Eigen::MatrixXd U_0 = svd.matrixU().rightCols(d - r);
  const Eigen::MatrixXd V_r = svd.matrixV().leftCols(r);
  const Eigen::MatrixXd V_0 = svd.matrixV().rightCols(d - r);
  const Eigen::VectorXd sigma = sv.head(r);

  // Index-1 test: the constraint block U_0' A V_0 must be invertible,
  // equivalently range(B) and A ker(B) must span the whole space.  The LU is
  // only formed when a kernel exists (Eigen rejects 0 x 0 decompositions).
  std::optional<Eigen::FullPivLU<Eigen::MatrixXd>> constraint_lu;
  if (d - r > 0) {
    constraint_lu.emplace(U_0.transpose() * A * V_0);
    constraint_lu->setThreshold(1e-10);
  }
  if (constraint_lu && !constraint_lu->isInvertible()) {
    bool regular = false;
    const std::complex<double> probes[] = {{0.371, 0.608}, {-1.77, 2.31}, {12.9, -3.4},
                                           {-0.052, -27.0}, {431.0, 97.0}};
    for (const auto& lambda : probes) {
      Eigen::FullPivLU<Eigen::MatrixXcd> plu(lambda * B.cast<std::complex<double>>() -
                                             A.cast<std::complex<double>>());
      plu.setThreshold(1e-10);
      if (plu.isInvertible()) {
        regular = true;
        break;
      }
    }
    if (!regular)
      throw std::invalid_argument(
          "pencil_semigroup: singular pencil (det(lambda B - A) vanishes identically)");
    throw std::invalid_argument(
        "pencil_semigroup: pencil index exceeds one (nested algebraic constraints), reduction "
        "not supported");
  }

  // Dynamics in range coordinates: with y the range(B) coordinates and z the
  // kernel coordinates, the constraint eliminates z and sigma y' = Ghat y.
  Eigen::MatrixXd Ghat;
  if (d - r > 0) {
    const Eigen::MatrixXd AVr = A * V_r;
    const Eigen::MatrixXd Z = constraint_lu->solve(U_0.transpose() * AVr);
    Ghat = U_r.transpose() * AVr - (U_r.transpose() * A * V_0) * Z;
  } else {
    Ghat = U_r.transpose() * A * V_r;
  }
  const Eigen::MatrixXd G = sigma.cwiseInverse().asDiagonal() * Ghat;

  // Oblique projector onto range(B) along A ker(B).
  Eigen::MatrixXd basis(d, d);
  basis.leftCols(r) = U_r;
  if (d - r > 0) basis.rightCols(d - r) = A * V_0;
  Eigen::FullPivLU<Eigen::MatrixXd> basis_lu(basis);
  basis_lu.setThreshold(1e-10);
  if (!basis_lu.isInvertible())
    throw std::invalid_argument(
        "pencil_semigroup: pencil index exceeds one (range(B) meets A ker(B)), reduction not "
        "supported");
  const Eigen::MatrixXd basis_inv = basis_lu.inverse();
  const Eigen::MatrixXd range_coords = basis_inv.topRows(r);

  PencilModel model;
  model.B = B;
  model.A = A;
  model.dim = d;
  model.rank = r;
  model.projector = U_r * range_coords;
  model.reduced_generator = G;

  // Spectrum and decay check.
  Eigen::VectorXcd evals(r);
  bool modal_ok = true;
  Eigen::MatrixXcd S, S_inv;
  if (r > 0) {
    // A symmetric pencil block makes Sigma^{-1/2} Ghat Sigma^{-1/2} symmetric;
    // that route gives orthogonal modal bases and exact real rates.
    const Eigen::VectorXd shalf = sigma.cwiseSqrt();
    const Eigen::MatrixXd K =
        shalf.cwiseInverse().asDiagonal() * Ghat * shalf.cwiseInverse().asDiagonal();
    if ((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + K.cwiseAbs().maxCoeff())) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (K + K.transpose()));
      evals = es.eigenvalues().cast<std::complex<double>>();
      S = (shalf.cwiseInverse().asDiagonal() * es.eigenvectors()).cast<std::complex<double>>();
      S_inv = (es.eigenvectors().transpose() * shalf.asDiagonal()).cast<std::complex<double>>();
    } else {
      Eigen::EigenSolver<Eigen::MatrixXd> es(G);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("pencil_semigroup: eigensolver failed on the reduced generator");
      evals = es.eigenvalues();
      S = es.eigenvectors();
      Eigen::FullPivLU<Eigen::MatrixXcd> slu(S);
      slu.setThreshold(1e-10);
      if (slu.isInvertible()) {
        S_inv = slu.inverse();
        const double recon = (S * evals.asDiagonal() * S_inv - G.cast<std::complex<double>>())
                                 .cwiseAbs()
                                 .maxCoeff();
        modal_ok = recon <= 1e-8 * (1.0 + G.cwiseAbs().maxCoeff());
      } else {
        modal_ok = false;  // defective generator: dense matrix exponential path
      }
    }
    for (int i = 0; i < r; ++i)
      if (evals(i).real() >= -1e-12)
        throw std::invalid_argument(
            "pencil_semigroup: not exponentially decaying (finite eigenvalue with nonnegative "
            "real part)");
  }
  model.finite_spectrum = evals;

  const Eigen::MatrixXd map_out = U_r * sigma.asDiagonal();
  const Eigen::MatrixXd map_in = sigma.cwiseInverse().asDiagonal() * range_coords;

  Eigen::MatrixXcd modal_out, modal_in;
  Eigen::VectorXcd rates;
  if (modal_ok && r > 0) {
    modal_out = map_out.cast<std::complex<double>>() * S;
    modal_in = S_inv * map_in.cast<std::complex<double>>();
    rates = -evals;
  } else if (r == 0) {
    modal_ok = true;
    modal_out = Eigen::MatrixXcd::Zero(d, 0);
    modal_in = Eigen::MatrixXcd::Zero(0, d);
    rates = Eigen::VectorXcd::Zero(0);
  }

  // Empirical envelope: beta = 1 in finite dimensions, c just inside the
  // spectral gap, M from a dense log-spaced sweep with a small safety factor.
  KernelEnvelope env{1.0, 1.0, 1.0};
  if (r > 0) {
    double gap = kInf;
    for (int i = 0; i < r; ++i) gap = std::min(gap, -evals(i).real());
    env.c = 0.995 * gap;
    PencilFamily probe(model, map_out, map_in, modal_ok, modal_out, modal_in, rates, env);
    double worst = 0.0;
    for (double t : log_spaced(1e-6, std::min(1e3, 50.0 / env.c), 400))
      worst = std::max(worst, probe.operator_norm(t) * std::exp(env.c * t));
    env.M = worst * 1.001;
  } else {
    env.M = 1e-300;
  }

  PencilSemigroup result;
  result.model = model;
  result.family = std::make_shared<PencilFamily>(model, map_out, map_in, modal_ok, modal_out,
                                                 modal_in, rates, env);
  return result;
}

EnvelopeCheck verify_envelope(const OperatorFamily& family, double t_min, double t_max, int n) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n < 2)
    throw std::invalid_argument("verify_envelope: need 0 < t_min < t_max and n >= 2");
  EnvelopeCheck check;
  check.pass = true;
  for (double t : log_spaced(t_min, t_max, n)) {
    const double ratio = family.operator_norm(t) / family.envelope().eval(t);
    if (ratio > check.worst_ratio) {
      check.worst_ratio = ratio;
      check.worst_t = t;
    }
  }
  check.pass = check.worst_ratio <= 1.0 + 1e-6;
  return check;
}

namespace {

void require_first_block_integrable(double beta, double q_conj) {
  const bool divergent =
      std::isinf(q_conj) ? beta < 1.0 : q_conj * (beta - 1.0) <= -1.0;
  if (divergent)
    throw std::invalid_argument(
        "block_norm_sum: first block divergent (integrability requires q'(beta-1) > -1)");
}

/// Envelope tail sum_{k>=K} ||env||_{L^{q'}[k,k+1]} <= env(K)/(1 - e^{-c}).
double envelope_tail(const KernelEnvelope& env, int K) {
  return env.M * std::exp(-env.c * K) * std::pow(static_cast<double>(K), env.beta - 1.0) /
         (1.0 - std::exp(-env.c));
}

BlockSumResult accumulate_blocks(const KernelEnvelope& env,
                                 const std::function<double(int)>& block_norm) {
  BlockSumResult result;
  int k = 0;
  while (true) {
    result.sum += block_norm(k);
    ++k;
    result.tail_bound = envelope_tail(env, k);
    if (k >= 2 && result.tail_bound < 1e-12 * result.sum) break;
    if (k > 200000)
      throw std::runtime_error("block_norm_sum: decay too slow for the tail to converge");
  }
  result.blocks = k;
  return result;
}

}  // namespace

BlockSumResult block_norm_sum(const KernelEnvelope& env, double q_conj,
                              const SingularIntegralConfig& cfg) {
  env.validate();
  if (!std::isinf(q_conj) && !(q_conj >= 1.0))
    throw std::invalid_argument("block_norm_sum: q' must be >= 1 or infinite");
  require_first_block_integrable(env.beta, q_conj);

  if (std::isinf(q_conj)) {
    // beta = 1: sup over [k, k+1] is attained at the left edge.
    return accumulate_blocks(
        env, [&](int k) { return k == 0 ? env.M : env.eval(static_cast<double>(k)); });
  }

  const double beta_eff = q_conj * (env.beta - 1.0) + 1.0;
  cfg.validate(beta_eff);
  return accumulate_blocks(env, [&](int k) {
    if (k == 0) {
      const double integral = integrate_singular(
          [&](double s) { return std::pow(env.M * std::exp(-env.c * s), q_conj); }, beta_eff,
          1.0, cfg);
      return std::pow(integral, 1.0 / q_conj);
    }
    const double integral = integrate_smooth(
        [&](double s) { return std::pow(env.eval(s), q_conj); }, static_cast<double>(k),
        static_cast<double>(k + 1), cfg.n_nodes);
    return std::pow(integral, 1.0 / q_conj);
  });
}

BlockSumResult block_norm_sum(const OperatorFamily& family, double q_conj,
                              const SingularIntegralConfig& cfg) {
  const KernelEnvelope& env = family.envelope();
  if (!std::isinf(q_conj) && !(q_conj >= 1.0))
    throw std::invalid_argument("block_norm_sum: q' must be >= 1 or infinite");
  require_first_block_integrable(env.beta, q_conj);

  if (std::isinf(q_conj)) {
    return accumulate_blocks(env, [&](int k) {
      double sup = 0.0;
      for (int j = 0; j <= 256; ++j) {
        const double t = std::max(1e-9, k + j / 256.0);
        sup = std::max(sup, family.operator_norm(t));
      }
      return sup;
    });
  }

  cfg.validate(q_conj * (env.beta - 1.0) + 1.0);
  return accumulate_blocks(env, [&](int k) {
    double integral = 0.0;
    if (k == 0) {
      // The measured norm is bounded even at 0+; the graded cells of the
      // singular mesh resolve its steep initial profile.
      for (const auto& cell : singular_mesh(env.beta, 1.0, cfg)) {
        const QuadRule rule = gauss_on(cell.first, cell.second, cfg.n_nodes);
        for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
          integral += rule.weights(i) * std::pow(family.operator_norm(rule.nodes(i)), q_conj);
      }
    } else {
      integral = integrate_smooth(
          [&](double s) { return std::pow(family.operator_norm(s), q_conj); },
          static_cast<double>(k), static_cast<double>(k + 1), cfg.n_nodes);
    }
    return std::pow(integral, 1.0 / q_conj);
  });
}

bool in_resolvent_region(std::complex<double> lambda, double c) {
  return lambda.real() >= -c * (std::abs(lambda.imag()) + 1.0) - 1e-12 * (1.0 + std::abs(lambda));
}

ConditionPReport check_condition_P(
    const std::function<double(std::complex<double>)>& resolvent_norm, double c, double M,
    double beta, int n_samples) {
  if (!(c > 0.0)) throw std::invalid_argument("check_condition_P: c must be positive");
  if (!(beta > 0.0) || beta > 1.0)
    throw std::invalid_argument("check_condition_P: beta must lie in (0, 1]");
  if (n_samples < 40) throw std::invalid_argument("check_condition_P: need at least 40 samples");

  ConditionPReport report;
  report.c = c;
  report.beta = beta;

  // Rays interpolate between the positive real axis (alpha = 0) and the
  // region boundary Re = -c(|Im| + 1) (alpha = 1), both half planes.
  const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const int per_ray = std::max(4, n_samples / 10);
  std::vector<std::complex<double>> samples;
  for (double alpha : alphas) {
    for (double sign : {1.0, -1.0}) {
      samples.emplace_back((1.0 - alpha) * 0.0 - alpha * c, 0.0);
      for (double s : log_spaced(1e-3, 1e6, per_ray - 1))
        samples.emplace_back((1.0 - alpha) * s - alpha * c * (s + 1.0), sign * alpha * s);
      if (alpha == 0.0) break;  // the real ray has no sign
    }
  }

  double worst = 0.0;
  for (const auto& lambda : samples) {
    double norm = 0.0;
    try {
      norm = resolvent_norm(lambda);
    } catch (const std::exception& e) {
      report.verdict = Verdict::kFail;
      report.worst_lambda = lambda;
      report.note = std::string("resolvent evaluation failed: ") + e.what();
      return report;
    }
    if (!std::isfinite(norm)) {
      report.verdict = Verdict::kFail;
      report.worst_lambda = lambda;
      report.note = "resolvent norm not finite at the sample";
      return report;
    }
    const double value = norm * std::pow(1.0 + std::abs(lambda), beta);
    if (value > worst) {
      worst = value;
      report.worst_lambda = lambda;
    }
  }

  if (M <= 0.0) {
    report.M = worst;
    report.fitted = true;
    report.worst_ratio = 1.0;
    report.verdict = Verdict::kPass;
    return report;
  }
  report.M = M;
  report.worst_ratio = worst / M;
  report.verdict = report.worst_ratio <= 1.0 + 1e-9 ? Verdict::kPass : Verdict::kFail;
  return report;
}

ConditionPReport check_condition_P(const Eigen::VectorXcd& spectrum, double c, double M,
                                   double beta, int n_samples) {
  if (spectrum.size() == 0)
    throw std::invalid_argument("check_condition_P: empty spectrum");
  return check_condition_P(
      [&spectrum](std::complex<double> lambda) {
        double best = 0.0;
        for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
          const double dist = std::abs(lambda - spectrum(k));
          if (dist < 1e-300)
            throw std::runtime_error("sampled lambda coincides with an eigenvalue");
          best = std::max(best, 1.0 / dist);
        }
        return best;
      },
      c, M, beta, n_samples);
}

ConditionPReport check_condition_P(const PencilModel& model, double c, double M, double beta,
                                   int n_samples) {
  return check_condition_P(
      [&model](std::complex<double> lambda) { return model.resolvent_norm(lambda); }, c, M, beta,
      n_samples);
}

}  // namespace apcauchy
