#include "aglab/spinor.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace aglab {

IndexSignature::IndexSignature(std::vector<Slot> s, int w) : slots(std::move(s)), weight(w) {
  int du = -1, dp = -1;
  for (const auto& sl : slots) {
    if (sl.dim <= 0) throw SignatureError("slot dimension must be positive");
    int& d = (sl.family == Family::Unprimed) ? du : dp;
    if (d < 0) d = sl.dim;
    if (d != sl.dim) throw SignatureError("slots of one family must share a dimension");
  }
}

long IndexSignature::size() const {
  long n = 1;
  for (const auto& s : slots) n *= s.dim;
  return n;
}

std::string IndexSignature::key() const {
  std::ostringstream os;
  for (const auto& s : slots)
    os << (s.family == Family::Unprimed ? 'u' : 'p') << (s.pos == Pos::Upper ? '^' : '_') << s.dim << ';';
  os << 'w' << weight;
  return os.str();
}

SpinorTensor::SpinorTensor(IndexSignature sig) : sig_(std::move(sig)) {
  v_.assign(sig_.size(), cd(0, 0));
  init_strides();
}

void SpinorTensor::init_strides() {
  strides_.assign(sig_.rank(), 1);
  for (int i = sig_.rank() - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * sig_.slots[i + 1].dim;
}

SpinorTensor SpinorTensor::delta(Family fam, int dim) {
  SpinorTensor d(IndexSignature({{fam, Pos::Lower, dim}, {fam, Pos::Upper, dim}}));
  for (int i = 0; i < dim; ++i) d.at({i, i}) = 1.0;
  return d;
}

SpinorTensor SpinorTensor::random(IndexSignature sig, std::function<double()> draw) {
  SpinorTensor t(std::move(sig));
  for (long i = 0; i < t.size(); ++i) t[i] = cd(draw(), draw());
  return t;
}

long SpinorTensor::flat(std::span<const int> idx) const {
  long f = 0;
  for (int i = 0; i < sig_.rank(); ++i) f += strides_[i] * idx[i];
  return f;
}

void SpinorTensor::unflat(long f, std::span<int> idx) const {
  for (int i = 0; i < sig_.rank(); ++i) {
    idx[i] = static_cast<int>(f / strides_[i]);
    f %= strides_[i];
  }
}

SpinorTensor SpinorTensor::permuted(const std::vector<int>& perm) const {
  const int r = rank();
  if (static_cast<int>(perm.size()) != r) throw SignatureError("permutation rank mismatch");
  std::vector<Slot> ns(r);
  for (int i = 0; i < r; ++i) ns[i] = sig_.slots[perm[i]];
  SpinorTensor out(IndexSignature(ns, sig_.weight));
  std::vector<int> idx(r), src(r);
  for (long f = 0; f < out.size(); ++f) {
    out.unflat(f, idx);
    for (int i = 0; i < r; ++i) src[perm[i]] = idx[i];
    out[f] = v_[flat(src)];
  }
  return out;
}

namespace {
void check_group(const IndexSignature& sig, const std::vector<int>& g) {
  if (g.size() < 2) return;
  const Slot& s0 = sig.slots[g[0]];
  for (int i : g)
    if (!(sig.slots[i] == s0)) throw SignatureError("(anti)symmetrization slots must share family, position and dim");
}
}  // namespace

SpinorTensor SpinorTensor::symmetrized(const std::vector<int>& slots) const {
  check_group(sig_, slots);
  std::vector<int> p(slots);
  std::sort(p.begin(), p.end());
  SpinorTensor acc = zeros(sig_);
  int count = 0;
  std::vector<int> perm(rank());
  do {
    std::iota(perm.begin(), perm.end(), 0);
    for (size_t i = 0; i < slots.size(); ++i) perm[slots[i]] = p[i];
    acc += permuted(perm);
    ++count;
  } while (std::next_permutation(p.begin(), p.end()));
  acc *= cd(1.0 / count, 0);
  return acc;
}

SpinorTensor SpinorTensor::antisymmetrized(const std::vector<int>& slots) const {
  check_group(sig_, slots);
  std::vector<int> base(slots);
  std::sort(base.begin(), base.end());
  std::vector<int> p(base);
  SpinorTensor acc = zeros(sig_);
  int count = 0;
  std::vector<int> perm(rank());
  do {
    // parity of p relative to base
    int inv = 0;
    for (size_t i = 0; i < p.size(); ++i)
      for (size_t j = i + 1; j < p.size(); ++j)
        if (p[i] > p[j]) ++inv;
    std::iota(perm.begin(), perm.end(), 0);
    for (size_t i = 0; i < slots.size(); ++i) perm[slots[i]] = p[i];
    SpinorTensor term = permuted(perm);
    if (inv % 2) term *= cd(-1, 0);
    acc += term;
    ++count;
  } while (std::next_permutation(p.begin(), p.end()));
  acc *= cd(1.0 / count, 0);
  return acc;
}

SpinorTensor SpinorTensor::pair_symmetrized(const std::vector<int>& a, const std::vector<int>& b, int sign) const {
  if (a.size() != b.size()) throw SignatureError("pair groups must have equal length");
  for (size_t i = 0; i < a.size(); ++i)
    if (!(sig_.slots[a[i]] == sig_.slots[b[i]])) throw SignatureError("pair groups must match slotwise");
  std::vector<int> perm(rank());
  std::iota(perm.begin(), perm.end(), 0);
  for (size_t i = 0; i < a.size(); ++i) {
    perm[a[i]] = b[i];
    perm[b[i]] = a[i];
  }
  SpinorTensor sw = permuted(perm);
  if (sign < 0) sw *= cd(-1, 0);
  SpinorTensor out = *this;
  out += sw;
  out *= cd(0.5, 0);
  return out;
}

SpinorTensor SpinorTensor::traced(int upper, int lower) const {
  const Slot& u = sig_.slots[upper];
  const Slot& l = sig_.slots[lower];
  if (u.family != l.family) throw SignatureError("trace slots must share a family");
  if (u.pos != Pos::Upper || l.pos != Pos::Lower) throw SignatureError("trace needs one upper and one lower slot");
  if (u.dim != l.dim) throw SignatureError("trace slot dimension mismatch");
  std::vector<Slot> ns;
  for (int i = 0; i < rank(); ++i)
    if (i != upper && i != lower) ns.push_back(sig_.slots[i]);
  SpinorTensor out(IndexSignature(ns, sig_.weight));
  std::vector<int> oidx(ns.size()), idx(rank());
  for (long f = 0; f < out.size(); ++f) {
    out.unflat(f, oidx);
    cd s = 0;
    for (int k = 0; k < u.dim; ++k) {
      int j = 0;
      for (int i = 0; i < rank(); ++i) {
        if (i == upper || i == lower)
          idx[i] = k;
        else
          idx[i] = oidx[j++];
      }
      s += v_[flat(idx)];
    }
    out[f] = s;
  }
  return out;
}

SpinorTensor SpinorTensor::outer(const SpinorTensor& o) const {
  std::vector<Slot> ns = sig_.slots;
  ns.insert(ns.end(), o.sig_.slots.begin(), o.sig_.slots.end());
  SpinorTensor out(IndexSignature(ns, sig_.weight + o.sig_.weight));
  for (long i = 0; i < size(); ++i)
    for (long j = 0; j < o.size(); ++j) out[i * o.size() + j] = v_[i] * o.v_[j];
  return out;
}

SpinorTensor SpinorTensor::apply_matrix(int slot, const Eigen::MatrixXcd& m) const {
  const int d = sig_.slots[slot].dim;
  if (m.rows() != m.cols() || m.rows() != d) throw SignatureError("matrix size must match slot dimension");
  SpinorTensor out = zeros(sig_);
  std::vector<int> idx(rank()), src(rank());
  for (long f = 0; f < size(); ++f) {
    out.unflat(f, idx);
    src = idx;
    cd s = 0;
    for (int j = 0; j < d; ++j) {
      src[slot] = j;
      s += m(idx[slot], j) * v_[flat(src)];
    }
    out[f] = s;
  }
  return out;
}

SpinorTensor& SpinorTensor::operator+=(const SpinorTensor& o) {
  if (o.size() != size()) throw SignatureError("shape mismatch in addition");
  for (long i = 0; i < size(); ++i) v_[i] += o.v_[i];
  return *this;
}

SpinorTensor& SpinorTensor::operator-=(const SpinorTensor& o) {
  if (o.size() != size()) throw SignatureError("shape mismatch in subtraction");
  for (long i = 0; i < size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

SpinorTensor& SpinorTensor::operator*=(cd s) {
  for (auto& x : v_) x *= s;
  return *this;
}

double SpinorTensor::sup_norm() const {
  double m = 0;
  for (const auto& x : v_) m = std::max(m, std::abs(x));
  return m;
}

double SpinorTensor::frob_norm() const {
  double s = 0;
  for (const auto& x : v_) s += std::norm(x);
  return std::sqrt(s);
}

double SpinorTensor::max_imag() const {
  double m = 0;
  for (const auto& x : v_) m = std::max(m, std::abs(x.imag()));
  return m;
}

bool SpinorTensor::is_real(double eps) const {
  double scale = std::max(1.0, sup_norm());
  return max_imag() <= eps * scale;
}

Eigen::VectorXcd SpinorTensor::vec() const {
  Eigen::VectorXcd v(size());
  for (long i = 0; i < size(); ++i) v(i) = v_[i];
  return v;
}

void SpinorTensor::set_vec(const Eigen::VectorXcd& v) {
  if (v.size() != size()) throw SignatureError("vector length mismatch");
  for (long i = 0; i < size(); ++i) v_[i] = v(i);
}

namespace {

struct TracePair {
  int upper, lower;
};

struct DeltaBasis {
  // Columns of the pure-trace subspace basis, and the QR factorization of it.
  std::vector<std::pair<TracePair, IndexSignature>> pairs;
  Eigen::MatrixXcd a;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr;
  bool empty = false;
};

const DeltaBasis& delta_basis_for(const IndexSignature& sig) {
  static std::map<std::string, DeltaBasis> cache;
  auto it = cache.find(sig.key());
  if (it != cache.end()) return it->second;

  DeltaBasis db;
  std::vector<TracePair> pairs;
  for (int u = 0; u < sig.rank(); ++u)
    for (int l = 0; l < sig.rank(); ++l)
      if (u != l && sig.slots[u].pos == Pos::Upper && sig.slots[l].pos == Pos::Lower &&
          sig.slots[u].family == sig.slots[l].family)
        pairs.push_back({u, l});

  if (pairs.empty()) {
    db.empty = true;
    return cache.emplace(sig.key(), std::move(db)).first->second;
  }

  const long n = sig.size();
  long ncols = 0;
  std::vector<long> reduced_sizes;
  for (const auto& pr : pairs) {
    long r = n / (static_cast<long>(sig.slots[pr.upper].dim) * sig.slots[pr.lower].dim);
    reduced_sizes.push_back(r);
    ncols += r;
  }
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, ncols);
  SpinorTensor probe((IndexSignature(sig)));
  std::vector<int> idx(sig.rank());
  long col0 = 0;
  for (size_t k = 0; k < pairs.size(); ++k) {
    const auto& pr = pairs[k];
    // column index within this pair: flat index over the remaining slots
    std::vector<long> rstrides;
    {
      long s = 1;
      std::vector<long> tmp;
      for (int i = sig.rank() - 1; i >= 0; --i) {
        if (i == pr.upper || i == pr.lower) continue;
        tmp.push_back(s);
        s *= sig.slots[i].dim;
      }
      rstrides.assign(tmp.rbegin(), tmp.rend());
    }
    for (long f = 0; f < n; ++f) {
      probe.unflat(f, idx);
      if (idx[pr.upper] != idx[pr.lower]) continue;
      long r = 0;
      int j = 0;
      for (int i = 0; i < sig.rank(); ++i) {
        if (i == pr.upper || i == pr.lower) continue;
        r += rstrides[j++] * idx[i];
      }
      a(f, col0 + r) = 1.0;
    }
    col0 += reduced_sizes[k];
  }
  db.a = a;
  db.qr.compute(a);
  return cache.emplace(sig.key(), std::move(db)).first->second;
}

}  // namespace

SpinorTensor SpinorTensor::pure_trace_part() const {
  const DeltaBasis& db = delta_basis_for(sig_);
  SpinorTensor out = zeros(sig_);
  if (db.empty) return out;
  Eigen::VectorXcd c = db.qr.solve(vec());
  out.set_vec(db.a * c);
  return out;
}

SpinorTensor SpinorTensor::trace_free_part() const {
  const DeltaBasis& db = delta_basis_for(sig_);
  if (db.empty) return *this;
  SpinorTensor out = *this;
  out -= pure_trace_part();
  return out;
}

TorsionParts wedge_decompose_torsion(const SpinorTensor& t, double pre_eps) {
  if (t.rank() != 6) throw SignatureError("torsion decomposition expects a 6-slot tensor");
  // antisymmetry under (AA') <-> (BB') is the precondition
  SpinorTensor symp = t.pair_symmetrized({0, 1}, {2, 3}, +1);
  double scale = std::max(1.0, t.sup_norm());
  if (symp.sup_norm() > pre_eps * scale)
    throw SignatureError("input is not antisymmetric under the tensor-index pair swap");
  TorsionParts parts;
  parts.f = t.symmetrized({0, 2}).antisymmetrized({1, 3});
  parts.f_tilde = t.antisymmetrized({0, 2}).symmetrized({1, 3});
  return parts;
}

double rel_diff(const SpinorTensor& a, const SpinorTensor& b) {
  SpinorTensor d = a;
  d -= b;
  double scale = std::max({1e-300, a.sup_norm(), b.sup_norm()});
  return d.sup_norm() / scale;
}

}  // namespace aglab
