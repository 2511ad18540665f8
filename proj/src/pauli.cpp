#include "qdiff/pauli.hpp"

#include <stdexcept>

namespace qdiff {

namespace {

// Phase exponent of sigma_a * sigma_b = i^k sigma_c.
int product_phase(Pauli a, Pauli b) {
    if (a == Pauli::I || b == Pauli::I || a == b) return 0;
    const int ia = static_cast<int>(a), ib = static_cast<int>(b);
    // X->Y->Z->X gives +i.
    return ((ib - ia + 3) % 3 == 1) ? 1 : 3;
}

Pauli product_axis(Pauli a, Pauli b) {
    return static_cast<Pauli>(static_cast<int>(a) ^ static_cast<int>(b));
}

}  // namespace

char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

PauliString::PauliString(std::vector<Pauli> axes, int phase)
    : axes_(std::move(axes)), phase_(((phase % 4) + 4) % 4) {}

PauliString PauliString::parse(std::string_view text) {
    int phase = 0;
    std::size_t pos = 0;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        if (text[pos] == '-') phase = 2;
        ++pos;
    }
    if (pos < text.size() && text[pos] == 'i') {
        phase += 1;
        ++pos;
    }
    std::vector<Pauli> axes;
    for (; pos < text.size(); ++pos) {
        switch (text[pos]) {
            case 'I': case '_': axes.push_back(Pauli::I); break;
            case 'X': axes.push_back(Pauli::X); break;
            case 'Y': axes.push_back(Pauli::Y); break;
            case 'Z': axes.push_back(Pauli::Z); break;
            default:
                throw std::invalid_argument("invalid Pauli string '" + std::string(text) + "'");
        }
    }
    if (axes.empty()) throw std::invalid_argument("empty Pauli string");
    return PauliString(std::move(axes), phase);
}

PauliString PauliString::single(int n, int qubit, Pauli p) {
    PauliString s(n);
    s.set(qubit, p);
    return s;
}

PauliString PauliString::from_index(int n, std::uint64_t index) {
    PauliString s(n);
    for (int q = n - 1; q >= 0; --q) {
        s.axes_[q] = static_cast<Pauli>(index & 3);
        index >>= 2;
    }
    return s;
}

cplx PauliString::phase_value() const {
    static const cplx table[4] = {1.0, kI, -1.0, -kI};
    return table[phase_];
}

int PauliString::weight() const {
    int w = 0;
    for (Pauli p : axes_) w += (p != Pauli::I);
    return w;
}

std::vector<int> PauliString::support() const {
    std::vector<int> s;
    for (int q = 0; q < n(); ++q)
        if (axes_[q] != Pauli::I) s.push_back(q);
    return s;
}

std::uint64_t PauliString::index() const {
    std::uint64_t idx = 0;
    for (Pauli p : axes_) idx = (idx << 2) | static_cast<std::uint64_t>(p);
    return idx;
}

std::string PauliString::str() const {
    std::string s;
    for (Pauli p : axes_) s.push_back(pauli_char(p));
    return s;
}

std::string PauliString::str_with_phase() const {
    static const char* prefix[4] = {"+", "+i", "-", "-i"};
    return prefix[phase_] + str();
}

void PauliString::act(std::size_t b, std::size_t& b_out, cplx& amp) const {
    const int nq = n();
    int k = phase_;
    std::size_t out = b;
    for (int q = 0; q < nq; ++q) {
        const std::size_t bit = std::size_t{1} << bit_of(q, nq);
        const bool one = (b & bit) != 0;
        switch (axes_[q]) {
            case Pauli::I: break;
            case Pauli::X: out ^= bit; break;
            case Pauli::Y: out ^= bit; k += one ? 3 : 1; break;
            case Pauli::Z: k += one ? 2 : 0; break;
        }
    }
    static const cplx table[4] = {1.0, kI, -1.0, -kI};
    b_out = out;
    amp = table[k & 3];
}

CMat PauliString::matrix() const {
    const std::size_t dim = dim_of(n());
    CMat m = CMat::Zero(dim, dim);
    for (std::size_t b = 0; b < dim; ++b) {
        std::size_t bo;
        cplx a;
        act(b, bo, a);
        m(bo, b) = a;
    }
    return m;
}

CVec PauliString::apply(const CVec& psi) const {
    const std::size_t dim = dim_of(n());
    if (static_cast<std::size_t>(psi.size()) != dim) throw std::invalid_argument("apply: size mismatch");
    CVec out(dim);
    for (std::size_t b = 0; b < dim; ++b) {
        std::size_t bo;
        cplx a;
        act(b, bo, a);
        out[bo] = a * psi[b];
    }
    return out;
}

double PauliString::expectation(const CVec& psi) const {
    const std::size_t dim = dim_of(n());
    if (static_cast<std::size_t>(psi.size()) != dim) throw std::invalid_argument("expectation: size mismatch");
    cplx acc = 0;
    for (std::size_t b = 0; b < dim; ++b) {
        std::size_t bo;
        cplx a;
        act(b, bo, a);
        acc += std::conj(psi[bo]) * a * psi[b];
    }
    return acc.real();
}

cplx PauliString::trace_with(const CMat& rho) const {
    const std::size_t dim = dim_of(n());
    if (static_cast<std::size_t>(rho.rows()) != dim) throw std::invalid_argument("trace_with: size mismatch");
    cplx acc = 0;
    for (std::size_t b = 0; b < dim; ++b) {
        std::size_t bo;
        cplx a;
        act(b, bo, a);
        acc += a * rho(b, bo);
    }
    return acc;
}

PauliString multiply(const PauliString& a, const PauliString& b) {
    if (a.n() != b.n()) throw std::invalid_argument("multiply: qubit count mismatch");
    std::vector<Pauli> axes(a.n());
    int k = a.phase() + b.phase();
    for (int q = 0; q < a.n(); ++q) {
        k += product_phase(a.at(q), b.at(q));
        axes[q] = product_axis(a.at(q), b.at(q));
    }
    return PauliString(std::move(axes), k);
}

bool commutes(const PauliString& a, const PauliString& b) {
    if (a.n() != b.n()) throw std::invalid_argument("commutes: qubit count mismatch");
    int anti = 0;
    for (int q = 0; q < a.n(); ++q) {
        const Pauli x = a.at(q), y = b.at(q);
        anti += (x != Pauli::I && y != Pauli::I && x != y);
    }
    return anti % 2 == 0;
}

cplx ope_coefficient(const PauliString& i, const PauliString& j, const PauliString& k) {
    if (i.n() != j.n() || j.n() != k.n()) throw std::invalid_argument("ope_coefficient: qubit count mismatch");
    const PauliString p = multiply(multiply(i, j), k);
    return p.weight() == 0 ? p.phase_value() : cplx{0.0, 0.0};
}

std::vector<PauliString> all_paulis(int n) {
    if (n < 0 || n > 6) throw std::invalid_argument("all_paulis: full enumeration limited to n <= 6");
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    std::vector<PauliString> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(PauliString::from_index(n, i));
    return out;
}

std::vector<PauliString> paulis_up_to_weight(int n, int w) {
    std::vector<PauliString> out;
    // Enumerate supports recursively so that large n never touches 4^n.
    for (int m = 1; m <= std::min(w, n); ++m) {
        std::vector<int> sup(m);
        for (int a = 0; a < m; ++a) sup[a] = a;
        while (true) {
            std::uint64_t combos = 1;
            for (int a = 0; a < m; ++a) combos *= 3;
            for (std::uint64_t c = 0; c < combos; ++c) {
                PauliString p(n);
                std::uint64_t r = c;
                for (int a = m - 1; a >= 0; --a) {
                    p.set(sup[a], static_cast<Pauli>(1 + r % 3));
                    r /= 3;
                }
                out.push_back(p);
            }
            int a = m - 1;
            while (a >= 0 && sup[a] == n - m + a) --a;
            if (a < 0) break;
            ++sup[a];
            for (int b = a + 1; b < m; ++b) sup[b] = sup[b - 1] + 1;
        }
    }
    return out;
}

double PauliVector::get(const PauliString& p) const {
    auto it = entries_.find(p.phase_free());
    return it == entries_.end() ? 0.0 : it->second;
}

void PauliVector::set(const PauliString& p, double value) {
    if (p.n() != n_) throw std::invalid_argument("PauliVector: qubit count mismatch");
    entries_[p.phase_free()] = value;
}

PauliVector expand(const CMat& rho) {
    const int n = qubits_of(rho.rows());
    return expand(rho, all_paulis(n));
}

PauliVector expand(const CMat& rho, const std::vector<PauliString>& basis) {
    const int n = qubits_of(rho.rows());
    if (!is_hermitian(rho, 1e-10)) throw std::invalid_argument("expand: input is not Hermitian");
    PauliVector z(n);
    for (const auto& p : basis) z.set(p, p.phase_free().trace_with(rho).real());
    return z;
}

PauliVector expand_pure(const CVec& psi, const std::vector<PauliString>& basis) {
    const int n = qubits_of(psi.size());
    PauliVector z(n);
    for (const auto& p : basis) z.set(p, p.phase_free().expectation(psi));
    return z;
}

CMat contract(const PauliVector& z) {
    const std::size_t dim = dim_of(z.n());
    CMat rho = CMat::Zero(dim, dim);
    for (const auto& [p, v] : z.entries()) {
        for (std::size_t b = 0; b < dim; ++b) {
            std::size_t bo;
            cplx a;
            p.act(b, bo, a);
            rho(bo, b) += v * a;
        }
    }
    return rho / static_cast<double>(dim);
}

}  // namespace qdiff
