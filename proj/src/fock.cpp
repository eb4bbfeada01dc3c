#include "dualrail/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace dualrail {

char pol_char(Pol p) { return p == Pol::H ? 'H' : 'V'; }

Monomial Monomial::single(const Mode& m) {
    Monomial mono;
    mono.multiply_mode(m);
    return mono;
}

Monomial Monomial::pair(const Mode& m1, const Mode& m2) {
    Monomial mono;
    mono.multiply_mode(m1);
    mono.multiply_mode(m2);
    return mono;
}

void Monomial::multiply_mode(const Mode& m, int count) {
    if (count <= 0) throw std::invalid_argument("mode count must be positive");
    auto it = std::lower_bound(
        factors_.begin(), factors_.end(), m,
        [](const std::pair<Mode, int>& f, const Mode& mode) { return f.first < mode; });
    if (it != factors_.end() && it->first == m) {
        it->second += count;
    } else {
        factors_.insert(it, {m, count});
    }
}

Monomial Monomial::times(const Monomial& other) const {
    Monomial result = *this;
    for (const auto& [mode, count] : other.factors_) result.multiply_mode(mode, count);
    return result;
}

int Monomial::photon_number() const {
    int n = 0;
    for (const auto& [mode, count] : factors_) n += count;
    return n;
}

double Monomial::bosonic_factor() const {
    double f = 1.0;
    for (const auto& [mode, count] : factors_)
        for (int k = 2; k <= count; ++k) f *= k;
    return f;
}

bool Monomial::occupies_site(const std::string& site) const {
    for (const auto& [mode, count] : factors_)
        if (mode.site == site) return true;
    return false;
}

bool Monomial::occupies_mode(const Mode& m) const {
    for (const auto& [mode, count] : factors_)
        if (mode == m) return true;
    return false;
}

std::string Monomial::str() const {
    if (factors_.empty()) return "1";
    std::string out;
    for (const auto& [mode, count] : factors_) {
        if (!out.empty()) out += ' ';
        out += mode.site;
        out += '/';
        out += pol_char(mode.pol);
        out += '=';
        out += std::to_string(count);
    }
    return out;
}

PhotonState PhotonState::vacuum() { return single_term(Monomial{}, 1.0); }

PhotonState PhotonState::single_term(const Monomial& m, cplx amp) {
    PhotonState s;
    s.add(m, amp);
    return s;
}

void PhotonState::add(const Monomial& m, cplx amp) {
    if (!terms_.empty() && m.photon_number() != photon_number())
        throw std::invalid_argument("photon-number mixing: state must stay homogeneous");
    auto [it, inserted] = terms_.try_emplace(m, amp);
    if (!inserted) it->second += amp;
}

int PhotonState::photon_number() const {
    if (terms_.empty()) return -1;
    return terms_.begin()->first.photon_number();
}

double PhotonState::norm() const {
    double n2 = 0.0;
    for (const auto& [mono, amp] : terms_) n2 += std::norm(amp) * mono.bosonic_factor();
    return std::sqrt(n2);
}

PhotonState PhotonState::scaled(cplx factor) const {
    PhotonState out;
    for (const auto& [mono, amp] : terms_) out.terms_.emplace(mono, amp * factor);
    return out;
}

PhotonState PhotonState::plus(const PhotonState& other) const {
    PhotonState out = *this;
    for (const auto& [mono, amp] : other.terms_) out.add(mono, amp);
    return out;
}

PhotonState PhotonState::times(const PhotonState& other) const {
    PhotonState out;
    for (const auto& [m1, a1] : terms_)
        for (const auto& [m2, a2] : other.terms_) out.add(m1.times(m2), a1 * a2);
    return out;
}

void PhotonState::prune(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second) < tol)
            it = terms_.erase(it);
        else
            ++it;
    }
}

const char* bell_name(BellKind k) {
    switch (k) {
        case BellKind::PhiPlus: return "phi+";
        case BellKind::PhiMinus: return "phi-";
        case BellKind::PsiPlus: return "psi+";
        case BellKind::PsiMinus: return "psi-";
    }
    throw std::logic_error("unhandled BellKind");
}

BellKind bell_from_name(const std::string& name) {
    if (name == "phi+") return BellKind::PhiPlus;
    if (name == "phi-") return BellKind::PhiMinus;
    if (name == "psi+") return BellKind::PsiPlus;
    if (name == "psi-") return BellKind::PsiMinus;
    throw std::invalid_argument("unknown Bell state name: " + name);
}

PhotonState make_bell(BellKind kind, const std::string& site_a,
                      const std::string& site_b) {
    if (site_a == site_b)
        throw std::invalid_argument("Bell pair requires two distinct sites");
    const double r = 1.0 / std::sqrt(2.0);
    const bool phi = (kind == BellKind::PhiPlus || kind == BellKind::PhiMinus);
    const bool plus = (kind == BellKind::PhiPlus || kind == BellKind::PsiPlus);
    const Pol first_b = phi ? Pol::H : Pol::V;
    const Pol second_b = phi ? Pol::V : Pol::H;
    PhotonState s;
    s.add(Monomial::pair({site_a, Pol::H}, {site_b, first_b}), r);
    s.add(Monomial::pair({site_a, Pol::V}, {site_b, second_b}), plus ? r : -r);
    return s;
}

ModeMap ModeMap::identity() {
    ModeMap m;
    m.identity_elsewhere_ = true;
    return m;
}

void ModeMap::set_image(const std::string& site, Image img) {
    images_[site] = std::move(img);
}

const ModeMap::Image* ModeMap::find_image(const std::string& site) const {
    auto it = images_.find(site);
    return it == images_.end() ? nullptr : &it->second;
}

ModeMap ModeMap::then(const ModeMap& after) const {
    ModeMap out;
    out.identity_elsewhere_ = identity_elsewhere_ && after.identity_elsewhere_;
    for (const auto& [site, img] : images_) {
        std::map<std::string, cplx> collected;
        for (const auto& [mid_site, mid_amp] : img) {
            if (const Image* next = after.find_image(mid_site)) {
                for (const auto& [out_site, out_amp] : *next)
                    collected[out_site] += mid_amp * out_amp;
            } else if (after.identity_elsewhere_) {
                collected[mid_site] += mid_amp;
            } else {
                throw std::invalid_argument("composition leaves site unmapped: " + mid_site);
            }
        }
        Image flat;
        for (const auto& [out_site, amp] : collected)
            if (std::abs(amp) >= kPruneTol) flat.push_back({out_site, amp});
        out.images_[site] = std::move(flat);
    }
    // Images of `after` whose domain sites this map passes through untouched.
    if (identity_elsewhere_) {
        for (const auto& [site, img] : after.images_)
            if (!images_.count(site)) out.images_[site] = img;
    }
    return out;
}

double ModeMap::unitarity_defect() const {
    std::vector<std::string> rows;
    std::map<std::string, size_t> col_index;
    for (const auto& [site, img] : images_) {
        rows.push_back(site);
        for (const auto& [out_site, amp] : img)
            col_index.try_emplace(out_site, col_index.size());
    }
    if (rows.size() != col_index.size())
        return std::numeric_limits<double>::infinity();
    const size_t n = rows.size();
    // U[r][c] = amplitude of column site c in the image of row site r.
    std::vector<std::vector<cplx>> u(n, std::vector<cplx>(n, 0.0));
    for (size_t r = 0; r < n; ++r)
        for (const auto& [out_site, amp] : images_.at(rows[r]))
            u[r][col_index.at(out_site)] = amp;
    double defect = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            cplx dot = 0.0;
            for (size_t r = 0; r < n; ++r) dot += std::conj(u[r][i]) * u[r][j];
            if (i == j) dot -= 1.0;
            defect = std::max(defect, std::abs(dot));
        }
    }
    return defect;
}

bool ModeMap::is_unitary(double tol) const { return unitarity_defect() <= tol; }

PhotonState apply_mode_map(const PhotonState& state, const ModeMap& map) {
    PhotonState out;
    for (const auto& [mono, amp] : state.terms()) {
        PhotonState term_image = PhotonState::single_term(Monomial{}, amp);
        for (const auto& [mode, count] : mono.factors()) {
            PhotonState factor_image;
            if (const ModeMap::Image* img = map.find_image(mode.site)) {
                for (const auto& [out_site, out_amp] : *img)
                    factor_image.add(Monomial::single({out_site, mode.pol}), out_amp);
            } else if (map.identity_elsewhere()) {
                factor_image.add(Monomial::single(mode), 1.0);
            } else {
                throw std::invalid_argument("mode map has no image for site: " + mode.site);
            }
            for (int k = 0; k < count; ++k) term_image = term_image.times(factor_image);
        }
        for (const auto& [m, a] : term_image.terms()) out.add(m, a);
    }
    out.prune();
    return out;
}

cplx inner_product(const PhotonState& s1, const PhotonState& s2) {
    cplx result = 0.0;
    for (const auto& [mono, a1] : s1.terms()) {
        auto it = s2.terms().find(mono);
        if (it != s2.terms().end())
            result += std::conj(a1) * it->second * mono.bosonic_factor();
    }
    return result;
}

PhotonState canonicalize(const PhotonState& state) {
    PhotonState out = state;
    out.prune();
    return out;
}

std::string to_lines(const PhotonState& state) {
    std::string out;
    char buf[64];
    for (const auto& [mono, amp] : state.terms()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g", amp.real(), amp.imag());
        out += buf;
        out += ' ';
        out += mono.str();
        out += '\n';
    }
    return out;
}

}  // namespace dualrail
