#pragma once
/*
 * Linear-optical element maps (balanced beam splitter, four-port mixer,
 * phase shifter) and the closed-form single-photon transfer function of a
 * mixing cell under binary {0, pi} phase control.
 */

#include <string>

#include "dualrail/fock.hpp"

namespace dualrail {

inline constexpr double kPi = 3.14159265358979323846;
// Control phases must be 0 or pi within this tolerance.
inline constexpr double kPhaseTol = 1e-9;

// Balanced beam splitter coupling two input sites to two output sites:
//   in_top    -> (out_top - out_bottom)/sqrt(2)
//   in_bottom -> (out_top + out_bottom)/sqrt(2)
// Sites not mentioned pass through unchanged.
ModeMap bs_map(const std::string& in_top, const std::string& in_bottom,
               const std::string& out_top, const std::string& out_bottom);

// Four-port mixer on sites (a, b, c, d):
//   x -> (-x + sum of the other three)/2.
// Self-inverse, and leaves (a-b)/sqrt(2)-type differences invariant up to
// sign while mapping (a+b)/sqrt(2) onto (c+d)/sqrt(2).
ModeMap grover_map(const std::string& a, const std::string& b,
                   const std::string& c, const std::string& d);

// Phase shifter on one site: x -> e^{i phi} x; identity elsewhere.
ModeMap phase_map(const std::string& site, double phi);

enum class PortId : int { e = 0, f = 1 };
enum class SideId : int { Left = 0, Right = 1 };

char port_char(PortId p);
char side_char(SideId s);
PortId port_from_char(char c);
SideId side_from_char(char c);
SideId other_side(SideId s);

// Binary phase settings seen by one photon crossing a mixing cell:
// the shifter on its entry rail, then the exit-side shifters on the far
// (straight-through) and near (returning) sides.
struct McuControl {
    double entry_phase = 0.0;
    double exit_phase_far = 0.0;
    double exit_phase_near = 0.0;
};

// Validates a phase is 0 or pi (mod 2pi) and canonicalizes it to {0, pi}.
double canonical_binary_phase(double phi);

enum class McuOutcome { Transmit, Reflect };

struct McuTransferResult {
    McuOutcome outcome;
    PortId exit_port;
    int sign;  // +1 or -1 overall amplitude factor
};

// Single-photon transfer through one mixing cell: where the photon exits and
// with what sign, as a function of the entry port and the binary controls.
// Entry phase selects transmit (straight through to the far side) versus
// reflect (back out the near side); the exit-side phase selects which of the
// two ports on the exit side the photon leaves by.
McuTransferResult mcu_transfer(PortId entry_port, const McuControl& control);

}  // namespace dualrail
