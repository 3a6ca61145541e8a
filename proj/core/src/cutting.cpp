#include "qmini/cutting.hpp"

#include <numeric>

#include "qmini/errors.hpp"
#include "qmini/rng.hpp"

namespace qmini {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

// Wire nodes: qubit u is node u, except that the cut qubit's downstream
// segment is the extra node n.
struct Partition {
  std::vector<bool> downstream;  // per original qubit, excluding the cut qubit
  bool separable = false;
};

Partition partition(const Circuit& c, CutPoint p) {
  const std::size_t n = c.num_qubits();
  const std::size_t post = n;
  UnionFind uf(n + 1);
  const auto node = [&](Qubit q, std::size_t gate_index) -> std::size_t {
    return (q == p.qubit && gate_index > p.gate_index) ? post : q;
  };
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Gate& g = c.gates()[i];
    if (g.arity() == 2) uf.unite(node(g.target(0), i), node(g.target(1), i));
  }
  Partition out;
  out.separable = uf.find(p.qubit) != uf.find(post);
  out.downstream.assign(n, false);
  for (Qubit q = 0; q < n; ++q) {
    if (q != p.qubit) out.downstream[q] = uf.find(q) == uf.find(post);
  }
  return out;
}

void check_point(const Circuit& c, CutPoint p) {
  if (p.qubit >= c.num_qubits()) {
    throw InvalidCut("cut qubit " + std::to_string(p.qubit) + " is outside the circuit");
  }
  if (p.gate_index >= c.size()) {
    throw InvalidCut("cut gate index " + std::to_string(p.gate_index) + " is past the last gate");
  }
  if (!c.gates()[p.gate_index].touches(p.qubit)) {
    throw InvalidCut("gate " + std::to_string(p.gate_index) + " does not act on qubit " +
                     std::to_string(p.qubit));
  }
}

}  // namespace

CutFragments cut(const CutSpec& spec) {
  const Circuit& c = spec.circuit;
  const CutPoint p = spec.point;
  check_point(c, p);
  const Partition part = partition(c, p);
  if (!part.separable) {
    throw InvalidCut("cutting qubit " + std::to_string(p.qubit) + " after gate " +
                     std::to_string(p.gate_index) + " leaves the circuit connected");
  }

  const std::size_t n = c.num_qubits();
  CutMetadata meta;
  meta.original_qubits = n;
  meta.cut_qubit = p.qubit;
  meta.upstream_map.assign(n, std::nullopt);
  meta.downstream_map.assign(n, std::nullopt);
  Qubit up = 0, down = 0;
  for (Qubit q = 0; q < n; ++q) {
    if (q == p.qubit) {
      meta.upstream_map[q] = up++;
      meta.downstream_map[q] = down++;
    } else if (part.downstream[q]) {
      meta.downstream_map[q] = down++;
    } else {
      meta.upstream_map[q] = up++;
    }
  }

  const auto dense = [](const std::vector<std::optional<Qubit>>& m) {
    std::vector<Qubit> out(m.size(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i].value_or(0);
    return out;
  };
  const std::vector<Qubit> up_map = dense(meta.upstream_map);
  const std::vector<Qubit> down_map = dense(meta.downstream_map);

  CutFragments f{Circuit(up, c.label() + "-up"), Circuit(down, c.label() + "-down"), meta};
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Gate& g = c.gates()[i];
    const bool on_cut = g.touches(p.qubit);
    const bool downstream =
        on_cut ? i > p.gate_index : part.downstream[g.target(0)];
    if (downstream) {
      f.downstream.add(g.remapped(down_map));
    } else {
      f.upstream.add(g.remapped(up_map));
    }
  }
  f.upstream.reserve_params(c.num_params());
  f.downstream.reserve_params(c.num_params());
  return f;
}

CutSpec random_cut_instance(std::size_t num_qubits, std::size_t depth, std::uint64_t seed) {
  if (num_qubits < 2) throw InvalidArgument("a cut instance needs at least two qubits");
  Xoshiro256 rng(seed);
  const auto shared = static_cast<Qubit>(rng.below(num_qubits - 1));
  const Circuit a = random_circuit(shared + 1, depth, derive_seed(seed, 1));
  const Circuit b = random_circuit(num_qubits - shared, depth, derive_seed(seed, 2));

  Circuit c(num_qubits, "cut-n" + std::to_string(num_qubits) + "-d" + std::to_string(depth) +
                            "-s" + std::to_string(seed));
  for (const Gate& g : a.gates()) c.add(g);
  std::vector<Qubit> shift(b.num_qubits());
  std::iota(shift.begin(), shift.end(), shared);
  for (const Gate& g : b.gates()) c.add(g.remapped(shift));

  std::size_t last = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.gates()[i].touches(shared)) last = i;
  }
  return {std::move(c), {last, shared}};
}

std::vector<CutPoint> valid_cut_points(const Circuit& c) {
  std::vector<CutPoint> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (Qubit q : c.gates()[i].targets()) {
      if (partition(c, {i, q}).separable) out.push_back({i, q});
    }
  }
  return out;
}

std::string_view to_string(CutBasis b) noexcept {
  switch (b) {
    case CutBasis::I: return "I";
    case CutBasis::X: return "X";
    case CutBasis::Y: return "Y";
    case CutBasis::Z: return "Z";
  }
  return "?";
}

std::string_view to_string(CutPrep p) noexcept {
  switch (p) {
    case CutPrep::zero: return "0";
    case CutPrep::one: return "1";
    case CutPrep::plus: return "+";
    case CutPrep::minus: return "-";
    case CutPrep::plus_i: return "+i";
    case CutPrep::minus_i: return "-i";
  }
  return "?";
}

std::vector<Gate> preparation_gates(CutPrep p, Qubit q) {
  using K = GateKind;
  switch (p) {
    case CutPrep::zero: return {};
    case CutPrep::one: return {Gate::single(K::X, q)};
    case CutPrep::plus: return {Gate::single(K::H, q)};
    case CutPrep::minus: return {Gate::single(K::X, q), Gate::single(K::H, q)};
    case CutPrep::plus_i: return {Gate::single(K::H, q), Gate::single(K::S, q)};
    case CutPrep::minus_i:
      return {Gate::single(K::X, q), Gate::single(K::H, q), Gate::single(K::S, q)};
  }
  return {};
}

std::vector<FragmentJob> enumerate_jobs() {
  return {
      {CutBasis::I, CutPrep::zero, 0.5},    {CutBasis::I, CutPrep::one, 0.5},
      {CutBasis::X, CutPrep::plus, 0.5},    {CutBasis::X, CutPrep::minus, -0.5},
      {CutBasis::Y, CutPrep::plus_i, 0.5},  {CutBasis::Y, CutPrep::minus_i, -0.5},
      {CutBasis::Z, CutPrep::zero, 0.5},    {CutBasis::Z, CutPrep::one, -0.5},
  };
}

namespace {

Circuit prepared_downstream(const CutFragments& f, CutPrep prep) {
  const Qubit cut_wire = *f.meta.downstream_map[f.meta.cut_qubit];
  Circuit prepared(f.downstream.num_qubits(), f.downstream.label());
  for (const Gate& g : preparation_gates(prep, cut_wire)) prepared.add(g);
  for (const Gate& g : f.downstream.gates()) prepared.add(g);
  return prepared;
}

}  // namespace

std::vector<JobPair> enumerate_jobs(const CutFragments& f) {
  std::vector<JobPair> out;
  for (const FragmentJob& job : enumerate_jobs()) {
    out.push_back({f.upstream, prepared_downstream(f, job.prep), job});
  }
  return out;
}

std::vector<FactorizedTerm> factorize(const CutFragments& f, const Observable& obs) {
  const CutMetadata& m = f.meta;
  if (obs.num_qubits() != m.original_qubits) {
    throw UnsupportedObservable("observable acts on " + std::to_string(obs.num_qubits()) +
                                " qubits but the cut circuit has " +
                                std::to_string(m.original_qubits));
  }
  if (m.upstream_map.size() != m.original_qubits || m.downstream_map.size() != m.original_qubits) {
    throw UnsupportedObservable("cut metadata does not cover every qubit");
  }
  std::vector<FactorizedTerm> out;
  out.reserve(obs.terms().size());
  for (const PauliString& term : obs.terms()) {
    FactorizedTerm ft{PauliString{std::vector<Pauli>(f.upstream.num_qubits(), Pauli::I), 1.0},
                      PauliString{std::vector<Pauli>(f.downstream.num_qubits(), Pauli::I), 1.0},
                      term.coeff};
    for (Qubit q = 0; q < m.original_qubits; ++q) {
      if (q == m.cut_qubit) {
        // The observable is measured at the circuit's end: downstream side.
        ft.downstream.ops[*m.downstream_map[q]] = term.ops[q];
      } else if (m.downstream_map[q]) {
        ft.downstream.ops[*m.downstream_map[q]] = term.ops[q];
      } else if (m.upstream_map[q]) {
        ft.upstream.ops[*m.upstream_map[q]] = term.ops[q];
      } else if (term.ops[q] != Pauli::I) {
        throw UnsupportedObservable("qubit " + std::to_string(q) + " is in neither fragment");
      }
    }
    out.push_back(std::move(ft));
  }
  return out;
}

Reconstruction reconstruct(Executor& exec, const CutFragments& f, const Observable& obs,
                           const CutRunOptions& options) {
  const std::vector<FactorizedTerm> terms = factorize(f, obs);
  const Qubit up_cut = *f.meta.upstream_map[f.meta.cut_qubit];

  // Upstream: one task per measurement basis, one observable term per original term.
  static constexpr CutBasis kBases[] = {CutBasis::I, CutBasis::X, CutBasis::Y, CutBasis::Z};
  static constexpr CutPrep kPreps[] = {CutPrep::zero,  CutPrep::one,    CutPrep::plus,
                                       CutPrep::minus, CutPrep::plus_i, CutPrep::minus_i};
  std::vector<Task> tasks;
  for (std::size_t b = 0; b < 4; ++b) {
    std::vector<PauliString> up_terms;
    for (const auto& t : terms) {
      PauliString s = t.upstream;
      s.ops[up_cut] = static_cast<Pauli>(static_cast<int>(kBases[b]));
      up_terms.push_back(std::move(s));
    }
    std::optional<ShotOptions> shots;
    if (options.shots) shots = ShotOptions{options.shots->shots, derive_seed(options.shots->seed, b)};
    tasks.push_back(make_fragment_task("cut-a-" + std::string(to_string(kBases[b])), f.upstream,
                                       Observable(f.upstream.num_qubits(), std::move(up_terms)),
                                       shots));
  }
  std::vector<PauliString> down_terms;
  for (const auto& t : terms) down_terms.push_back(t.downstream);
  const Observable down_obs(f.downstream.num_qubits(), down_terms);
  for (std::size_t p = 0; p < 6; ++p) {
    const Circuit prepared = prepared_downstream(f, kPreps[p]);
    std::optional<ShotOptions> shots;
    if (options.shots) {
      shots = ShotOptions{options.shots->shots, derive_seed(options.shots->seed, 4 + p)};
    }
    tasks.push_back(make_fragment_task("cut-b-" + std::to_string(p), prepared, down_obs, shots));
  }

  Reconstruction out;
  out.results = exec.submit_all(std::move(tasks));
  // Ids sort as cut-a-{I,X,Y,Z} then cut-b-{0..5}.
  const auto upstream_values = [&](CutBasis b) -> const std::vector<double>& {
    return out.results[static_cast<std::size_t>(b)].vector();
  };
  const auto downstream_values = [&](CutPrep p) -> const std::vector<double>& {
    return out.results[4 + static_cast<std::size_t>(p)].vector();
  };

  for (std::size_t t = 0; t < terms.size(); ++t) {
    for (const FragmentJob& job : enumerate_jobs()) {
      const double a = upstream_values(job.basis)[t];
      const double b = downstream_values(job.prep)[t];
      const double contribution = terms[t].coeff * job.weight * a * b;
      out.value += contribution;
      out.jobs.push_back({{"term", t},
                          {"basis", to_string(job.basis)},
                          {"prep", to_string(job.prep)},
                          {"weight", job.weight},
                          {"upstream", a},
                          {"downstream", b},
                          {"contribution", contribution}});
    }
  }
  return out;
}

nlohmann::json to_json(const CutMetadata& m) {
  const auto map_json = [](const std::vector<std::optional<Qubit>>& v) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& q : v) j.push_back(q ? nlohmann::json(*q) : nlohmann::json(nullptr));
    return j;
  };
  return {{"original_qubits", m.original_qubits},
          {"cut_qubit", m.cut_qubit},
          {"upstream_map", map_json(m.upstream_map)},
          {"downstream_map", map_json(m.downstream_map)}};
}

}  // namespace qmini
