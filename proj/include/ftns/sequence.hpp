#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ftns {

enum class SequenceKind { fid, spin_echo, cpmg };

// One constant-sign stretch of the +/-1 switching function.
struct Segment {
  double begin;
  double end;
  int sign;
};

// Ideal, instantaneous pi-pulse control sequence applied over a total time t.
class PulseSequence {
 public:
  PulseSequence() = default;

  static PulseSequence fid() { return PulseSequence(SequenceKind::fid, 0); }
  static PulseSequence spin_echo() { return PulseSequence(SequenceKind::spin_echo, 1); }
  static PulseSequence cpmg(int n_pulses);

  SequenceKind kind() const { return kind_; }
  int n_pulses() const { return n_pulses_; }

  // Pulse instants for total time t. CPMG uses t_j = (j - 1/2) t / n.
  std::vector<double> pulse_times(double t) const;
  std::vector<Segment> segments(double t) const;

  // p such that F(omega, t) ~ omega^(2p) as omega -> 0.
  int low_frequency_order() const;

  std::string name() const;
  static PulseSequence parse(std::string_view name, int n_pulses = 0);

  friend bool operator==(const PulseSequence&, const PulseSequence&) = default;

 private:
  PulseSequence(SequenceKind kind, int n) : kind_(kind), n_pulses_(n) {}

  SequenceKind kind_ = SequenceKind::fid;
  int n_pulses_ = 0;
};

// Filter function F(omega t) = |int_0^t f(s) e^{i omega s} ds|^2 of the switching
// function f. Finite at omega = 0; symmetric in omega.
double filter_value(const PulseSequence& sequence, double omega, double t);

// Same quantity summed segment by segment; slower, used as a cross-check.
double filter_by_segments(const PulseSequence& sequence, double omega, double t);

// K with F(omega, t) <= K / omega^2 for every t.
double filter_tail_constant(const PulseSequence& sequence);

}  // namespace ftns
