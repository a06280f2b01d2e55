#include "qlink/swapping.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "qlink/errors.hpp"

namespace qlink {

namespace {

using Table = std::array<std::array<double, 4>, 4>;

// Index order (00, +, -, 11).
constexpr Table kRight{{
    {0.0, 0.0, 0.0, 0.5},
    {0.0, 0.5, 0.0, 0.5},
    {0.0, 0.0, 0.5, 0.5},
    {0.5, 0.5, 0.5, 0.5},
}};

constexpr Table kWrong{{
    {0.0, 0.0, 0.0, 0.5},
    {0.0, 0.0, 0.5, 0.5},
    {0.0, 0.5, 0.0, 0.5},
    {0.5, 0.5, 0.5, 0.5},
}};

}  // namespace

const Table& pme_right_table() { return kRight; }
const Table& pme_wrong_table() { return kWrong; }

SwapOutcome pme_convert(const BellDiagonalMix& left, const BellDiagonalMix& right) {
  left.validate();
  right.validate();
  const auto l = left.as_array();
  const auto r = right.as_array();
  SwapOutcome out;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double w = l[i] * r[j];
      out.right_weight += kRight[i][j] * w;
      out.wrong_weight += kWrong[i][j] * w;
    }
  }
  out.success_probability = out.right_weight + out.wrong_weight;
  return out;
}

double f_pme_vs_ideal(const BellDiagonalMix& mix) {
  mix.validate();
  const double den = mix.c_plus + mix.c_minus + 2.0 * mix.c11;
  if (!(den > 0.0)) throw DegenerateInputError("mix has no clicked component");
  return (mix.c_plus + mix.c11) / den;
}

double f_pme_self(const BellDiagonalMix& mix) {
  const SwapOutcome s = pme_convert(mix, mix);
  if (!(s.success_probability > 0.0)) throw DegenerateInputError("no coincidence possible for this mix");
  return s.right_weight / s.success_probability;
}

double f_pme_self_closed_form(double v_theta, double v_f) {
  return 0.5 * (1.0 + v_theta * v_theta * (1.0 + v_f * v_f));
}

BellDiagonalMix mix_from_post_selection(double f_post, double v_f, double c00) {
  if (!(f_post >= 0.0 && f_post <= 1.0)) throw DomainError("post-selected fidelity must lie in [0, 1]");
  if (!(v_f >= 0.0 && v_f <= 1.0)) throw DomainError("Fock visibility must lie in [0, 1]");
  if (!(c00 >= 0.0 && c00 < 1.0)) throw DomainError("vacuum weight must lie in [0, 1)");
  const double x = 1.0 - v_f;
  const double minus = 1.0 - f_post - x;
  if (minus < -1e-12) throw DomainError("f_post and v_f imply a negative c-");
  const double s = 1.0 - c00;
  return BellDiagonalMix::make(c00, f_post * s, std::max(minus, 0.0) * s, x * s);
}

// ---------------------------------------------------------------------------

PhaseLedger::PhaseLedger(Terms terms) {
  for (const auto& [sym, c] : terms) add(sym, c);
}

void PhaseLedger::add(const std::string& symbol, std::int64_t coefficient) {
  if (symbol.empty()) throw ValidationError("phase symbol must be nonempty");
  if (coefficient == 0) return;
  auto it = terms_.find(symbol);
  if (it == terms_.end()) {
    terms_.emplace(symbol, coefficient);
    return;
  }
  it->second += coefficient;
  if (it->second == 0) terms_.erase(it);
}

std::int64_t PhaseLedger::coefficient(const std::string& symbol) const {
  const auto it = terms_.find(symbol);
  return it == terms_.end() ? 0 : it->second;
}

PhaseLedger& PhaseLedger::operator+=(const PhaseLedger& other) {
  for (const auto& [sym, c] : other.terms_) add(sym, c);
  return *this;
}

PhaseLedger& PhaseLedger::operator-=(const PhaseLedger& other) {
  for (const auto& [sym, c] : other.terms_) add(sym, -c);
  return *this;
}

std::int64_t PhaseLedger::evaluate(const std::map<std::string, std::int64_t>& values) const {
  std::int64_t total = 0;
  for (const auto& [sym, c] : terms_) {
    const auto it = values.find(sym);
    if (it == values.end()) throw ValidationError("no value for phase symbol " + sym);
    total += c * it->second;
  }
  return total;
}

std::string PhaseLedger::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [sym, c] : terms_) {
    const std::int64_t mag = c < 0 ? -c : c;
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    if (mag != 1) os << mag << "*";
    os << sym;
    first = false;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

ChainSpec ChainSpec::linear(const std::vector<std::string>& names) {
  ChainSpec spec;
  for (const auto& n : names) spec.nodes.push_back({n, "phi_" + n, "psi_" + n, "pump_" + n});
  for (std::size_t k = 0; k + 1 < names.size(); ++k) {
    const auto side = (k % 2 == 0) ? LinkPhaseSide::Right : LinkPhaseSide::Left;
    spec.segments.push_back({"theta_" + names[k] + names[k + 1], side});
  }
  for (std::size_t b = 1; b + 1 < names.size(); ++b) spec.swap_order.push_back(b);
  spec.validate();
  return spec;
}

void ChainSpec::validate() const {
  if (nodes.size() < 2) throw ValidationError("a chain needs at least two nodes");
  if (segments.size() != nodes.size() - 1) throw ValidationError("a linear chain has nodes - 1 segments");
  std::set<std::string> names;
  std::set<std::string> symbols;
  const auto claim = [&symbols](const std::string& s) {
    if (s.empty()) throw ValidationError("chain symbols must be nonempty");
    if (!symbols.insert(s).second) throw ValidationError("duplicate chain symbol " + s);
  };
  for (const auto& n : nodes) {
    if (n.name.empty() || !names.insert(n.name).second) throw ValidationError("node names must be unique and nonempty");
    claim(n.write_laser);
    claim(n.read_laser);
    claim(n.pump_laser);
  }
  for (const auto& s : segments) claim(s.link_phase);
  std::vector<std::size_t> order = swap_order;
  std::sort(order.begin(), order.end());
  if (order.size() != nodes.size() - 2) throw ValidationError("every interior node must be swapped exactly once");
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] != i + 1) throw ValidationError("swap order must be a permutation of the interior nodes");
  }
}

namespace {

struct Pair {
  std::size_t left_node;
  std::size_t right_node;
  PhaseLedger left_branch;   ///< excitation stored at the left end
  PhaseLedger right_branch;  ///< excitation stored at the right end
  PhaseLedger global;
};

PhaseLedger excitation_phase(const ChainNode& node) {
  PhaseLedger l;
  l.add(node.write_laser, 1);
  l.add(node.pump_laser, 1);
  return l;
}

Pair compose_chain(const ChainSpec& chain, const std::string& tag) {
  std::vector<Pair> pairs;
  for (std::size_t k = 0; k < chain.segments.size(); ++k) {
    const auto& seg = chain.segments[k];
    Pair p{k, k + 1, excitation_phase(chain.nodes[k]), excitation_phase(chain.nodes[k + 1]), {}};
    (seg.side == LinkPhaseSide::Left ? p.left_branch : p.right_branch).add(seg.link_phase, 1);
    const std::string t = "t_" + chain.nodes[k].name + chain.nodes[k + 1].name + tag;
    p.global.add("omega_w*" + t, 1);
    p.global.add("omega_p*" + t, 1);
    pairs.push_back(std::move(p));
  }

  for (std::size_t b : chain.swap_order) {
    const auto left_it = std::find_if(pairs.begin(), pairs.end(), [b](const Pair& p) { return p.right_node == b; });
    const auto right_it = std::find_if(pairs.begin(), pairs.end(), [b](const Pair& p) { return p.left_node == b; });
    if (left_it == pairs.end() || right_it == pairs.end()) throw ValidationError("swap node is not shared by two pairs");
    Pair P = *left_it;
    Pair Q = *right_it;

    // Both memories at b are read with the same laser; a single click after
    // the beamsplitter keeps the two amplitudes with exactly one read-out photon.
    PhaseLedger read;
    read.add(chain.nodes[b].read_laser, 1);
    Pair merged{P.left_node, Q.right_node, P.left_branch + Q.left_branch + read, P.right_branch + read + Q.right_branch,
                P.global + Q.global};

    std::erase_if(pairs, [b](const Pair& p) { return p.right_node == b || p.left_node == b; });
    pairs.push_back(std::move(merged));
  }
  if (pairs.size() != 1) throw ValidationError("chain did not reduce to a single pair");
  return pairs.front();
}

}  // namespace

ChainPhaseResult chain_phase_ledger(const ChainSpec& chain) {
  chain.validate();
  const Pair up = compose_chain(chain, "_U");
  const Pair down = compose_chain(chain, "_D");

  ChainPhaseResult out;
  out.eme_relative = up.right_branch - up.left_branch;

  const auto& a = chain.nodes.front();
  const auto& z = chain.nodes.back();
  PhaseLedger read_a;
  read_a.add(a.read_laser, 1);
  PhaseLedger read_z;
  read_z.add(z.read_laser, 1);

  // Two-sided coincidences select (A_U, Z_D) and (Z_U, A_D).
  const PhaseLedger amp1 = up.left_branch + read_a + down.right_branch + read_z;
  const PhaseLedger amp2 = up.right_branch + read_z + down.left_branch + read_a;
  out.pme_relative = amp2 - amp1;

  out.global = up.global + down.global;
  out.global.add("omega_r*t_readout", 1);
  return out;
}

std::vector<std::string> interior_laser_symbols(const ChainSpec& chain) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i + 1 < chain.nodes.size(); ++i) {
    out.push_back(chain.nodes[i].write_laser);
    out.push_back(chain.nodes[i].read_laser);
    out.push_back(chain.nodes[i].pump_laser);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string arm_symbol(const char* name, int arm) { return std::string(name) + "_" + std::to_string(arm); }

// Write/write-out phase of one arm (conversion at the front facet).
PhaseLedger write_phase(int arm) {
  PhaseLedger l;
  l.add(arm_symbol("L_w", arm), 1);
  l.add(arm_symbol("mot_w", arm), -1);
  l.add(arm_symbol("L_wo", arm), 1);
  l.add(arm_symbol("L_WG", arm), 1);
  l.add(arm_symbol("L_tel", arm), 1);
  l.add(arm_symbol("L_pump", arm), -1);
  return l;
}

// Read/read-out phase; the read-step ensemble phase is mot_w + offset.
PhaseLedger read_phase(int arm) {
  PhaseLedger l;
  l.add(arm_symbol("L_r", arm), 1);
  l.add(arm_symbol("mot_w", arm), 1);
  l.add("mot_offset", 1);
  l.add(arm_symbol("L_ro", arm), 1);
  return l;
}

PhaseLedger write_read_loop(int arm) {
  PhaseLedger l;
  l.add(arm_symbol("L_w", arm), 1);
  l.add(arm_symbol("L_r", arm), 1);
  return l;
}

PhaseLedger output_loop(int arm) {
  PhaseLedger l;
  l.add(arm_symbol("L_ro", arm), 1);
  l.add(arm_symbol("L_wo", arm), 1);
  l.add(arm_symbol("L_WG", arm), 1);
  l.add(arm_symbol("L_tel", arm), 1);
  l.add(arm_symbol("L_pump", arm), -1);
  return l;
}

void bind(std::map<std::string, std::int64_t>& v, const ArmPaths& p, int arm) {
  v[arm_symbol("L_w", arm)] = p.write;
  v[arm_symbol("L_r", arm)] = p.read;
  v[arm_symbol("L_wo", arm)] = p.write_out;
  v[arm_symbol("L_ro", arm)] = p.read_out;
  v[arm_symbol("L_pump", arm)] = p.pump;
  v[arm_symbol("L_tel", arm)] = p.telecom;
  v[arm_symbol("L_WG", arm)] = p.waveguide;
  v[arm_symbol("mot_w", arm)] = p.mot_write;
}

bool divisible(std::int64_t x, std::int64_t m) { return x % m == 0; }

}  // namespace

DecompositionReport interferometer_decomposition(const InterferometerGeometry& geometry) {
  if (geometry.lock_modulus <= 0) throw ValidationError("lock modulus must be positive");

  const PhaseLedger total = (write_phase(1) + read_phase(1)) - (write_phase(2) + read_phase(2));
  const PhaseLedger loop_wr = write_read_loop(1) - write_read_loop(2);
  const PhaseLedger loop_out = output_loop(1) - output_loop(2);

  DecompositionReport r;
  r.identity_holds = (total - loop_wr - loop_out).empty();

  std::map<std::string, std::int64_t> values{{"mot_offset", geometry.mot_offset}};
  bind(values, geometry.arm1, 1);
  bind(values, geometry.arm2, 2);
  r.write_read_locked = divisible(loop_wr.evaluate(values), geometry.lock_modulus);
  r.output_locked = divisible(loop_out.evaluate(values), geometry.lock_modulus);
  r.total_locked = divisible(total.evaluate(values), geometry.lock_modulus);
  return r;
}

bool interferometer_decomposition_check(const InterferometerGeometry& geometry) {
  const auto r = interferometer_decomposition(geometry);
  return r.identity_holds && r.write_read_locked && r.output_locked;
}

}  // namespace qlink
