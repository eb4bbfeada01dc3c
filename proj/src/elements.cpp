#include "dualrail/elements.hpp"

#include <cmath>
#include <stdexcept>

namespace dualrail {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

ModeMap bs_map(const std::string& in_top, const std::string& in_bottom,
               const std::string& out_top, const std::string& out_bottom) {
    ModeMap m = ModeMap::identity();
    m.set_image(in_top, {{out_top, kInvSqrt2}, {out_bottom, -kInvSqrt2}});
    m.set_image(in_bottom, {{out_top, kInvSqrt2}, {out_bottom, kInvSqrt2}});
    return m;
}

ModeMap grover_map(const std::string& a, const std::string& b,
                   const std::string& c, const std::string& d) {
    ModeMap m = ModeMap::identity();
    const std::string rails[4] = {a, b, c, d};
    for (int i = 0; i < 4; ++i) {
        ModeMap::Image img;
        for (int j = 0; j < 4; ++j) img.push_back({rails[j], i == j ? -0.5 : 0.5});
        m.set_image(rails[i], std::move(img));
    }
    return m;
}

ModeMap phase_map(const std::string& site, double phi) {
    ModeMap m = ModeMap::identity();
    m.set_image(site, {{site, std::exp(cplx(0.0, phi))}});
    return m;
}

char port_char(PortId p) { return p == PortId::e ? 'e' : 'f'; }
char side_char(SideId s) { return s == SideId::Left ? 'L' : 'R'; }

PortId port_from_char(char c) {
    if (c == 'e') return PortId::e;
    if (c == 'f') return PortId::f;
    throw std::invalid_argument(std::string("unknown port: ") + c);
}

SideId side_from_char(char c) {
    if (c == 'L') return SideId::Left;
    if (c == 'R') return SideId::Right;
    throw std::invalid_argument(std::string("unknown side: ") + c);
}

SideId other_side(SideId s) {
    return s == SideId::Left ? SideId::Right : SideId::Left;
}

double canonical_binary_phase(double phi) {
    double r = std::fmod(phi, 2.0 * kPi);
    if (r < 0) r += 2.0 * kPi;
    if (std::abs(r) <= kPhaseTol || std::abs(r - 2.0 * kPi) <= kPhaseTol) return 0.0;
    if (std::abs(r - kPi) <= kPhaseTol) return kPi;
    throw std::invalid_argument("phase must be 0 or pi");
}

McuTransferResult mcu_transfer(PortId entry_port, const McuControl& control) {
    const bool entry_pi = canonical_binary_phase(control.entry_phase) != 0.0;
    const bool far_pi = canonical_binary_phase(control.exit_phase_far) != 0.0;
    const bool near_pi = canonical_binary_phase(control.exit_phase_near) != 0.0;

    // After the entry beam splitter and entry shifter the photon sits on the
    // symmetric (+) or antisymmetric (-) rail combination; the mixer maps the
    // symmetric one across and sends the antisymmetric one back negated.
    int rail_sign = (entry_port == PortId::e) ? -1 : +1;
    if (entry_pi) rail_sign = -rail_sign;

    McuTransferResult r{};
    if (rail_sign > 0) {
        r.outcome = McuOutcome::Transmit;
        r.sign = +1;
        r.exit_port = far_pi ? PortId::e : PortId::f;
    } else {
        r.outcome = McuOutcome::Reflect;
        r.sign = -1;
        r.exit_port = near_pi ? PortId::f : PortId::e;
    }
    return r;
}

}  // namespace dualrail
