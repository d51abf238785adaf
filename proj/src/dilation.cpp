#include "nclp/dilation.hpp"

#include <cmath>

namespace nclp {

SeqElement::SeqElement(FiniteVNA algebra, std::vector<AlgElement> slots)
    : algebra_(std::move(algebra)), slots_(std::move(slots)) {
  for (const auto& s : slots_)
    if (!s.algebra().same_structure(algebra_))
      throw shape_error("SeqElement: slot algebra mismatch");
}

SeqElement SeqElement::embed(const AlgElement& x) {
  return SeqElement(x.algebra(), {x});
}

AlgElement SeqElement::head() const {
  if (slots_.empty()) return AlgElement::zero(algebra_);
  return slots_.front();
}

double SeqElement::lp_norm(double p) const {
  double acc = 0.0;
  for (const auto& s : slots_) acc += std::pow(nclp::lp_norm(s, p), p);
  return std::pow(acc, 1.0 / p);
}

SeqElement ShiftDilation::apply_isometry(const SeqElement& v) const {
  AlgElement x0 = v.head();
  std::vector<AlgElement> slots;
  slots.reserve(static_cast<size_t>(v.slot_count()) + 1);
  slots.push_back(T.apply(x0));
  slots.push_back(S_T.apply(x0));
  for (int i = 1; i < v.slot_count(); ++i) slots.push_back(v.slot(i));
  return SeqElement(v.algebra(), std::move(slots));
}

ShiftDilation shift_dilation(const LpOperator& t, double p, const LampertiOptions& opts) {
  LampertiAnalysis a = decompose(t, p, opts);
  if (a.status != LampertiStatus::lamperti || !a.decomposition)
    throw std::domain_error("shift_dilation: operator is not Lamperti within tolerance");
  AlgElement rho = rho_of(t, p, *a.decomposition);
  double rho_max = 0.0;
  for (int k = 0; k < rho.block_count(); ++k)
    rho_max = std::max(rho_max, rho.block(k).real().diagonal().maxCoeff());
  if (rho_max > 1.0 + 1e-8)
    throw std::domain_error("shift_dilation: operator is not contractive (rho > 1)");
  // Defect mass below the rank cutoff is roundoff from the rho extraction;
  // keeping it would reinject its p-th root into S_T.
  AlgElement defect = funcalc(rho, [p, &opts](double s) {
    const double gap = std::max(1.0 - s, 0.0);
    return gap <= opts.rank_tol_rel ? 0.0 : std::pow(gap, 1.0 / p);
  });
  return ShiftDilation{t, LpOperator::left_multiplication(defect), rho, p};
}

AlgElement simultaneous_apply(const std::vector<ShiftDilation>& systems,
                              const std::vector<int>& word, const AlgElement& x,
                              double* residual) {
  SeqElement v = SeqElement::embed(x);
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (*it < 0 || *it >= static_cast<int>(systems.size()))
      throw std::invalid_argument("simultaneous_apply: word index out of range");
    v = systems[static_cast<size_t>(*it)].apply_isometry(v);
  }
  AlgElement result = v.head();
  if (residual) {
    AlgElement direct = x;
    for (auto it = word.rbegin(); it != word.rend(); ++it)
      direct = systems[static_cast<size_t>(*it)].T.apply(direct);
    const double p = systems.empty() ? 2.0 : systems.front().p;
    *residual = lp_norm(result - direct, p);
  }
  return result;
}

TensorDilation::TensorDilation(std::vector<double> lambda, std::vector<LpOperator> ops,
                               int n_steps, double p, const TensorDilationOptions& opts)
    : algebra_(ops.empty() ? throw std::invalid_argument("convex_n_dilation: no operators")
                           : ops.front().algebra()),
      lambda_(std::move(lambda)),
      ops_(std::move(ops)),
      n_steps_(n_steps),
      p_(p) {
  if (!(p > 1.0) || std::isinf(p))
    throw std::domain_error("convex_n_dilation: requires 1 < p < inf");
  if (n_steps_ < 1) throw std::invalid_argument("convex_n_dilation: N >= 1");
  if (lambda_.size() != ops_.size())
    throw std::invalid_argument("convex_n_dilation: weight/operator count mismatch");
  double sum = 0.0;
  for (double l : lambda_) {
    if (l < 0.0) throw std::domain_error("convex_n_dilation: negative weight");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::domain_error("convex_n_dilation: weights must sum to 1");
  for (const auto& t : ops_)
    if (!t.algebra().same_structure(algebra_))
      throw shape_error("convex_n_dilation: algebra mismatch");

  // Each operator is replaced by its shift-dilation isometry unless all of
  // them are already isometric (rho = 1). Truncating the lift space to N+1
  // slots is exact for every product of length <= N starting from slot 0.
  std::vector<ShiftDilation> lifts;
  bool all_isometric = true;
  for (const auto& t : ops_) {
    ShiftDilation sd = shift_dilation(t, p, opts.lamperti);
    const double gap = inf_norm(AlgElement::identity(algebra_) - sd.rho);
    if (gap > 1e-10) all_isometric = false;
    lifts.push_back(std::move(sd));
  }
  lifted_ = opts.lift_non_isometric && !all_isometric;
  if (lifted_) {
    lifts_ = std::move(lifts);
    inner_slots_ = n_steps_ + 1;
  } else {
    inner_slots_ = 1;
  }

  tuple_count_ = 1;
  for (int k = 0; k < n_steps_; ++k) {
    tuple_count_ *= static_cast<long>(ops_.size());
    if (tuple_count_ > opts.max_total_dim)
      throw resource_error("convex_n_dilation: index set exceeds budget", tuple_count_);
  }
  total_dim_ = tuple_count_ * n_steps_ * inner_slots_ * algebra_.element_dim();
  if (total_dim_ > opts.max_total_dim)
    throw resource_error("convex_n_dilation: dilation space exceeds budget", total_dim_);
}

LpOperator TensorDilation::average() const { return convex_combine(lambda_, ops_); }

AlgElement TensorDilation::inner_component(const Vector& v, long tuple, int k,
                                           int slot) const {
  const int d = algebra_.element_dim();
  const long base = ((tuple * n_steps_ + k) * inner_slots_ + slot) * d;
  return devectorize(algebra_, v.segment(base, d));
}

void TensorDilation::set_inner_component(Vector& v, long tuple, int k, int slot,
                                         const AlgElement& x) const {
  const int d = algebra_.element_dim();
  const long base = ((tuple * n_steps_ + k) * inner_slots_ + slot) * d;
  v.segment(base, d) = vectorize(x);
}

namespace {
int tuple_digit(long tuple, int position, int radix) {
  for (int i = 0; i < position; ++i) tuple /= radix;
  return static_cast<int>(tuple % radix);
}
}  // namespace

Vector TensorDilation::embed(const AlgElement& x) const {
  Vector v = Vector::Zero(total_dim_);
  for (long t = 0; t < tuple_count_; ++t) {
    double lam = 1.0;
    for (int k = 0; k < n_steps_; ++k)
      lam *= lambda_[static_cast<size_t>(tuple_digit(t, k, static_cast<int>(ops_.size())))];
    const double coeff = std::pow(lam / n_steps_, 1.0 / p_);
    AlgElement scaled = coeff * x;
    for (int k = 0; k < n_steps_; ++k) set_inner_component(v, t, k, 0, scaled);
  }
  return v;
}

AlgElement TensorDilation::compress(const Vector& v) const {
  const double pprime = p_ / (p_ - 1.0);
  AlgElement acc = AlgElement::zero(algebra_);
  for (long t = 0; t < tuple_count_; ++t) {
    double lam = 1.0;
    for (int k = 0; k < n_steps_; ++k)
      lam *= lambda_[static_cast<size_t>(tuple_digit(t, k, static_cast<int>(ops_.size())))];
    const double coeff = std::pow(lam / n_steps_, 1.0 / pprime);
    for (int k = 0; k < n_steps_; ++k)
      acc = acc + coeff * inner_component(v, t, k, 0);
  }
  return acc;
}

void TensorDilation::apply_inner_op(int op, const Vector& in, long tuple_in, int k_in,
                                    Vector& out, long tuple_out, int k_out) const {
  if (!lifted_) {
    set_inner_component(out, tuple_out, k_out, 0,
                        ops_[static_cast<size_t>(op)].apply(inner_component(in, tuple_in, k_in, 0)));
    return;
  }
  const ShiftDilation& sd = lifts_[static_cast<size_t>(op)];
  AlgElement x0 = inner_component(in, tuple_in, k_in, 0);
  set_inner_component(out, tuple_out, k_out, 0, sd.T.apply(x0));
  set_inner_component(out, tuple_out, k_out, 1, sd.S_T.apply(x0));
  for (int s = 1; s + 1 < inner_slots_; ++s)
    set_inner_component(out, tuple_out, k_out, s + 1, inner_component(in, tuple_in, k_in, s));
}

Vector TensorDilation::apply_isometry(const Vector& v) const {
  Vector out = Vector::Zero(total_dim_);
  const int n = static_cast<int>(ops_.size());
  for (long t = 0; t < tuple_count_; ++t)
    for (int k = 0; k < n_steps_; ++k) {
      const int sigma_k = (k + 1) % n_steps_;  // the N-cycle
      apply_inner_op(tuple_digit(t, k, n), v, t, sigma_k, out, t, k);
    }
  return out;
}

double TensorDilation::lp_norm_Y(const Vector& v) const {
  double acc = 0.0;
  for (long t = 0; t < tuple_count_; ++t)
    for (int k = 0; k < n_steps_; ++k)
      for (int s = 0; s < inner_slots_; ++s)
        acc += std::pow(lp_norm(inner_component(v, t, k, s), p_), p_);
  return std::pow(acc, 1.0 / p_);
}

Vector TensorDilation::sample(std::mt19937_64& rng, bool positive) const {
  Vector v = Vector::Zero(total_dim_);
  // Last inner slot stays zero: the truncated lift is isometric exactly there.
  const int usable = lifted_ ? inner_slots_ - 1 : inner_slots_;
  for (long t = 0; t < tuple_count_; ++t)
    for (int k = 0; k < n_steps_; ++k)
      for (int s = 0; s < usable; ++s)
        set_inner_component(v, t, k, s,
                            positive ? random_psd(algebra_, rng)
                                     : random_element(algebra_, rng));
  return v;
}

bool TensorDilation::slotwise_psd(const Vector& v, double tol) const {
  for (long t = 0; t < tuple_count_; ++t)
    for (int k = 0; k < n_steps_; ++k)
      for (int s = 0; s < inner_slots_; ++s)
        if (!is_psd(inner_component(v, t, k, s), tol)) return false;
  return true;
}

Matrix TensorDilation::compressed_power(int m) const {
  const int d = algebra_.element_dim();
  Matrix out(d, d);
  for (int k = 0; k < algebra_.block_count(); ++k)
    for (int r = 0; r < algebra_.dim(k); ++r)
      for (int c = 0; c < algebra_.dim(k); ++c) {
        Vector v = embed(AlgElement::matrix_unit(algebra_, k, r, c));
        for (int i = 0; i < m; ++i) v = apply_isometry(v);
        out.col(algebra_.block_offset(k) + r * algebra_.dim(k) + c) =
            vectorize(compress(v));
      }
  return out;
}

TensorDilation convex_n_dilation(const std::vector<double>& lambda,
                                 const std::vector<LpOperator>& ops, int n_steps,
                                 double p, const TensorDilationOptions& opts) {
  return TensorDilation(lambda, ops, n_steps, p, opts);
}

TensorVerification verify_tensor_dilation(const TensorDilation& sys, int samples,
                                          unsigned seed) {
  TensorVerification rep;
  rep.total_dim = sys.total_dim();
  LpOperator avg = sys.average();
  LpOperator tm = LpOperator::identity(sys.algebra());
  for (int m = 0; m <= sys.cycle_length(); ++m) {
    rep.residuals.push_back((tm.matrix() - sys.compressed_power(m)).cwiseAbs().maxCoeff());
    tm = compose(avg, tm);
  }
  rep.qj_identity = rep.residuals.front();
  rep.isometry_deviation = verify_isometry(sys, samples, seed);
  return rep;
}

double verify_isometry(const ShiftDilation& sys, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  double dev = 0.0;
  for (int i = 0; i < samples; ++i) {
    const int slots = 1 + static_cast<int>(rng() % 4);
    std::vector<AlgElement> xs;
    for (int s = 0; s < slots; ++s) xs.push_back(random_element(sys.T.algebra(), rng));
    SeqElement v(sys.T.algebra(), std::move(xs));
    dev = std::max(dev,
                   std::abs(sys.apply_isometry(v).lp_norm(sys.p) - v.lp_norm(sys.p)));
  }
  return dev;
}

double verify_isometry(const TensorDilation& sys, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  double dev = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vector v = sys.sample(rng);
    dev = std::max(dev, std::abs(sys.lp_norm_Y(sys.apply_isometry(v)) - sys.lp_norm_Y(v)));
  }
  return dev;
}

}  // namespace nclp
