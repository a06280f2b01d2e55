#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qlink/protocol_states.hpp"

namespace qlink {

// ---------------------------------------------------------------------------
// Conversion of two Fock-basis pairs into a polarization-encoded pair.

struct SwapOutcome {
  double right_weight = 0.0;
  double wrong_weight = 0.0;
  double success_probability = 0.0;  ///< right + wrong
};

/// Coincidence weights for combining component i of `left` with component j of
/// `right`, index order (00, +, -, 11). Entries are 0 or 1/2.
const std::array<std::array<double, 4>, 4>& pme_right_table();
const std::array<std::array<double, 4>, 4>& pme_wrong_table();

/// Sums c_i(left) c_j(right) over all 16 component pairs with the tables above.
SwapOutcome pme_convert(const BellDiagonalMix& left, const BellDiagonalMix& right);

/// (c+ + c11) / (c+ + c- + 2 c11): the fraction of right coincidences when
/// `mix` is combined with an ideal partner. Throws DegenerateInputError when
/// the denominator vanishes.
double f_pme_vs_ideal(const BellDiagonalMix& mix);

/// right / (right + wrong) for `mix` combined with itself. Throws
/// DegenerateInputError when no coincidence is possible (pure vacuum).
double f_pme_self(const BellDiagonalMix& mix);

/// Closed-form approximation 1/2 [1 + V_theta^2 (1 + V_F^2)]. Reported for
/// comparison only; exceeds 1 for large visibilities.
double f_pme_self_closed_form(double v_theta, double v_f);

/// Builds a mix whose post-selected fidelity c+/(c+ + c- + c11) is `f_post`
/// and whose double-excitation share c11/(c+ + c- + c11) is 1 - `v_f`.
/// Throws DomainError if the implied c- would be negative.
BellDiagonalMix mix_from_post_selection(double f_post, double v_f, double c00);

// ---------------------------------------------------------------------------
// Symbolic phase bookkeeping.

/// Sparse integer combination of named phase symbols.
class PhaseLedger {
 public:
  using Terms = std::map<std::string, std::int64_t>;

  PhaseLedger() = default;
  explicit PhaseLedger(Terms terms);

  void add(const std::string& symbol, std::int64_t coefficient);
  std::int64_t coefficient(const std::string& symbol) const;
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  PhaseLedger& operator+=(const PhaseLedger& other);
  PhaseLedger& operator-=(const PhaseLedger& other);
  friend PhaseLedger operator+(PhaseLedger a, const PhaseLedger& b) { return a += b; }
  friend PhaseLedger operator-(PhaseLedger a, const PhaseLedger& b) { return a -= b; }
  friend bool operator==(const PhaseLedger&, const PhaseLedger&) = default;

  /// Evaluates the combination with integer symbol values; missing symbols
  /// throw ValidationError.
  std::int64_t evaluate(const std::map<std::string, std::int64_t>& values) const;

  /// e.g. "phi_C - phi_A + theta_AB - theta_BC"; "0" when empty.
  std::string to_string() const;

 private:
  Terms terms_;
};

/// Which end of a segment carries the segment's stabilized link phase.
enum class LinkPhaseSide { Left, Right };

struct ChainNode {
  std::string name;
  std::string write_laser;
  std::string read_laser;
  std::string pump_laser;
};

/// Segment k joins nodes k and k+1.
struct ChainSegment {
  std::string link_phase;
  LinkPhaseSide side = LinkPhaseSide::Right;
};

struct ChainSpec {
  std::vector<ChainNode> nodes;
  std::vector<ChainSegment> segments;
  std::vector<std::size_t> swap_order;  ///< interior node indices, each exactly once

  /// Linear chain with symbols phi_X, psi_X, pump_X and theta_XY. Link phases
  /// sit on the odd-indexed node of each segment, so consecutive segments
  /// enter the swapped state with alternating signs. Swaps run left to right.
  static ChainSpec linear(const std::vector<std::string>& names);

  /// Throws ValidationError for fewer than two nodes, a segment count other
  /// than nodes - 1, duplicate or empty names/symbols, or a swap order that is
  /// not a permutation of the interior nodes.
  void validate() const;
};

struct ChainPhaseResult {
  /// Phase of the end-Z branch relative to the end-A branch of the swapped
  /// single-excitation pair.
  PhaseLedger eme_relative;
  /// Relative phase between the two coincidence amplitudes surviving the
  /// conversion of two such pairs into one polarization pair.
  PhaseLedger pme_relative;
  /// Frequency-times-time terms common to every surviving amplitude.
  PhaseLedger global;
};

ChainPhaseResult chain_phase_ledger(const ChainSpec& chain);

/// Symbols for node-local laser phases of interior nodes.
std::vector<std::string> interior_laser_symbols(const ChainSpec& chain);

// ---------------------------------------------------------------------------
// Two-interferometer decomposition of the read-out phase.

/// Optical path contributions of one arm, each as an integer count of a phase
/// quantum (L / lambda expressed in units of pi / lock_modulus).
struct ArmPaths {
  std::int64_t write = 0;
  std::int64_t read = 0;
  std::int64_t write_out = 0;
  std::int64_t read_out = 0;
  std::int64_t pump = 0;
  std::int64_t telecom = 0;
  std::int64_t waveguide = 0;
  std::int64_t mot_write = 0;  ///< ensemble phase at the write step
};

struct InterferometerGeometry {
  ArmPaths arm1;
  ArmPaths arm2;
  std::int64_t mot_offset = 0;    ///< read-step ensemble phase minus write-step phase, same in both arms
  std::int64_t lock_modulus = 2;  ///< a locked difference is a multiple of this many quanta (n pi)
};

struct DecompositionReport {
  bool identity_holds = false;   ///< total phase difference == write/read lock + output lock, symbolically
  bool write_read_locked = false;
  bool output_locked = false;
  bool total_locked = false;
};

/// Verifies symbolically that the write/read-out phase difference of the two
/// arms decomposes into the write+read loop and the write-out+read-out+
/// conversion loop with the ensemble phases cancelling, then evaluates both
/// loop conditions for the given geometry.
DecompositionReport interferometer_decomposition(const InterferometerGeometry& geometry);

/// True when the decomposition identity holds and both loops are locked.
bool interferometer_decomposition_check(const InterferometerGeometry& geometry);

}  // namespace qlink
