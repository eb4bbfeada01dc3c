#pragma once
/*
 * Few-photon bosonic algebra over labeled modes.
 *
 * States are polynomials in creation operators: each term is a monomial
 * (an unordered multiset of modes with occupation counts) with a complex
 * amplitude.  A mode is a (site, polarization) pair; sites are opaque,
 * totally ordered string labels.  All states are kept homogeneous in total
 * photon number and in canonical term order.
 */

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dualrail {

using cplx = std::complex<double>;

// Terms with |amplitude| below this are dropped during canonicalization.
inline constexpr double kPruneTol = 1e-12;
// Default tolerance for numeric comparisons of amplitudes/probabilities.
inline constexpr double kCompareTol = 1e-9;

enum class Pol : int { H = 0, V = 1 };

char pol_char(Pol p);

struct Mode {
    std::string site;
    Pol pol = Pol::H;

    friend bool operator==(const Mode&, const Mode&) = default;
    friend auto operator<=>(const Mode&, const Mode&) = default;
};

// Product of creation operators, canonical form: factors sorted by mode,
// every count >= 1.  The empty monomial is the vacuum.
class Monomial {
public:
    Monomial() = default;

    static Monomial single(const Mode& m);
    static Monomial pair(const Mode& m1, const Mode& m2);

    // Multiplies this monomial by another `count` powers of mode `m`.
    void multiply_mode(const Mode& m, int count = 1);
    Monomial times(const Monomial& other) const;

    const std::vector<std::pair<Mode, int>>& factors() const { return factors_; }
    int photon_number() const;
    // Squared norm of the bare monomial applied to vacuum: prod_i n_i!.
    double bosonic_factor() const;
    bool occupies_site(const std::string& site) const;
    bool occupies_mode(const Mode& m) const;
    bool empty() const { return factors_.empty(); }

    // "site/P=count" tokens joined by spaces, canonical order.
    std::string str() const;

    friend bool operator==(const Monomial&, const Monomial&) = default;
    friend auto operator<=>(const Monomial&, const Monomial&) = default;

private:
    std::vector<std::pair<Mode, int>> factors_;
};

// Homogeneous-photon-number superposition of monomials.
class PhotonState {
public:
    PhotonState() = default;  // the zero state (no terms)

    static PhotonState zero() { return PhotonState{}; }
    static PhotonState vacuum();
    static PhotonState single_term(const Monomial& m, cplx amp);

    // Merges a term in, enforcing photon-number homogeneity.
    void add(const Monomial& m, cplx amp);

    const std::map<Monomial, cplx>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    // -1 for the zero state, else the common total photon number.
    int photon_number() const;
    double norm() const;

    PhotonState scaled(cplx factor) const;
    PhotonState plus(const PhotonState& other) const;
    // Polynomial product; photon numbers add.
    PhotonState times(const PhotonState& other) const;

    void prune(double tol = kPruneTol);

private:
    std::map<Monomial, cplx> terms_;
};

enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

const char* bell_name(BellKind k);
BellKind bell_from_name(const std::string& name);

// (site_a ~ first slot, site_b ~ second slot):
//   phi+- = (aH bH +- aV bV)/sqrt(2),  psi+- = (aH bV +- aV bH)/sqrt(2).
PhotonState make_bell(BellKind kind, const std::string& site_a,
                      const std::string& site_b);

// Linear substitution rule on modes.  Polarization-diagonal: the same image
// applies to both H and V at a site.  Sites without an image either raise an
// error on application or pass through unchanged when the identity-elsewhere
// flag is set.
class ModeMap {
public:
    using Image = std::vector<std::pair<std::string, cplx>>;

    ModeMap() = default;
    static ModeMap identity();

    void set_image(const std::string& site, Image img);
    const Image* find_image(const std::string& site) const;
    const std::map<std::string, Image>& images() const { return images_; }

    bool identity_elsewhere() const { return identity_elsewhere_; }
    void set_identity_elsewhere(bool v) { identity_elsewhere_ = v; }

    // Composition: (this->then(after))(x) == after(this(x)).
    ModeMap then(const ModeMap& after) const;

    // Square support check: rows are the domain sites, columns the union of
    // image sites.  Returns max |U^dag U - I|, or +inf when not square.
    double unitarity_defect() const;
    bool is_unitary(double tol = 1e-12) const;

private:
    std::map<std::string, Image> images_;
    bool identity_elsewhere_ = false;
};

// Substitutes every creation operator in `state` by its image, expanding
// products and recollecting in canonical order.  Throws std::invalid_argument
// if a populated site has no image and the map is not identity-elsewhere.
PhotonState apply_mode_map(const PhotonState& state, const ModeMap& map);

// <s1|s2> with bosonic factors: sum over shared monomials of
// conj(a1)*a2*prod n_i!.
cplx inner_product(const PhotonState& s1, const PhotonState& s2);

// Re-merges and prunes; idempotent.
PhotonState canonicalize(const PhotonState& state);

// Line-oriented serialization: one term per line,
// "<amp_re> <amp_im> <site/P=count> ...", terms in canonical order.
std::string to_lines(const PhotonState& state);

}  // namespace dualrail
