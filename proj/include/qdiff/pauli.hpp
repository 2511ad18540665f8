#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qdiff/linalg.hpp"

namespace qdiff {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);

// n-qubit Pauli string with a phase i^phase, phase in {0,1,2,3}.
class PauliString {
public:
    PauliString() = default;
    explicit PauliString(int n) : axes_(n, Pauli::I) {}
    PauliString(std::vector<Pauli> axes, int phase = 0);

    // Accepts an optional sign prefix ("+", "-", "i", "+i", "-i") followed
    // by one of I/X/Y/Z (or '_' for I) per qubit, qubit 0 first.
    static PauliString parse(std::string_view text);
    static PauliString single(int n, int qubit, Pauli p);
    // Base-4 digits, qubit 0 most significant. Valid for n <= 31.
    static PauliString from_index(int n, std::uint64_t index);

    int n() const { return static_cast<int>(axes_.size()); }
    Pauli at(int q) const { return axes_.at(q); }
    void set(int q, Pauli p) { axes_.at(q) = p; }
    int phase() const { return phase_; }
    cplx phase_value() const;
    int weight() const;
    std::vector<int> support() const;
    std::uint64_t index() const;

    PauliString phase_free() const { return PauliString(axes_, 0); }
    // Axes only, e.g. "XIZ".
    std::string str() const;
    // With phase prefix, e.g. "-iXIZ".
    std::string str_with_phase() const;

    // Image of basis state |b>: P|b> = amp * |b'>.
    void act(std::size_t b, std::size_t& b_out, cplx& amp) const;
    CMat matrix() const;
    CVec apply(const CVec& psi) const;
    double expectation(const CVec& psi) const;
    // Tr(rho P).
    cplx trace_with(const CMat& rho) const;

    bool operator==(const PauliString& o) const { return phase_ == o.phase_ && axes_ == o.axes_; }
    bool operator!=(const PauliString& o) const { return !(*this == o); }
    bool operator<(const PauliString& o) const {
        if (axes_ != o.axes_) return axes_ < o.axes_;
        return phase_ < o.phase_;
    }

private:
    std::vector<Pauli> axes_;
    int phase_ = 0;
};

PauliString multiply(const PauliString& a, const PauliString& b);
bool commutes(const PauliString& a, const PauliString& b);
// Tr(P_i P_j P_k) / 2^n.
cplx ope_coefficient(const PauliString& i, const PauliString& j, const PauliString& k);

// All 4^n phase-free strings in index order (n <= 6).
std::vector<PauliString> all_paulis(int n);
// Phase-free strings with 1 <= weight <= w, ordered by weight then index.
std::vector<PauliString> paulis_up_to_weight(int n, int w);

// Real coefficients z_P = Tr(rho P) keyed by phase-free strings.
class PauliVector {
public:
    PauliVector() = default;
    explicit PauliVector(int n) : n_(n) {}

    int n() const { return n_; }
    double get(const PauliString& p) const;
    void set(const PauliString& p, double value);
    const std::map<PauliString, double>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    bool operator==(const PauliVector& o) const { return n_ == o.n_ && entries_ == o.entries_; }

private:
    int n_ = 0;
    std::map<PauliString, double> entries_;
};

// Full expansion; requires n <= 6.
PauliVector expand(const CMat& rho);
PauliVector expand(const CMat& rho, const std::vector<PauliString>& basis);
PauliVector expand_pure(const CVec& psi, const std::vector<PauliString>& basis);
// rho = sum_P z_P P / 2^n.
CMat contract(const PauliVector& z);

}  // namespace qdiff
