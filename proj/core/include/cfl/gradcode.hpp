#pragma once

#include <map>
#include <shared_mutex>
#include <vector>

#include <Eigen/Dense>

#include "cfl/fixedpoint.hpp"
#include "cfl/rng.hpp"

namespace cfl {

// Which copy of the encoding matrix decoding coefficients are solved
// against: the real-valued construction output or the decoded values of its
// fixed-point quantization (what the devices actually multiplied with).
enum class BView { Real, Quantized };

struct DecodeVector {
    Eigen::VectorXd coefficients; // one per used row, in rows_used order
    std::vector<int> rows_used;   // lowest-indexed minimum-size subset
    double residual = 0.0;        // max-norm of a^T B_rows - ones
};

struct VerifyReport {
    double max_residual = 0.0;
    long sets_tested = 0;
    long failures = 0;
    bool exhaustive = true;
};

// An (alpha, D) cyclic code: row i of B is supported on the alpha cyclically
// consecutive positions starting at i, and every D-alpha+1 rows span the
// all-ones vector, so the server can recover the full gradient sum from any
// D-alpha+1 coded responses.
class GradientCode {
public:
    GradientCode() = default;
    GradientCode(int D, int alpha, Eigen::MatrixXd b_real, FxMatrix b_fx,
                 std::vector<std::vector<int>> supports)
        : D_(D), alpha_(alpha), B_real_(std::move(b_real)), B_fx_(std::move(b_fx)),
          supports_(std::move(supports)) {}
    GradientCode(const GradientCode& o)
        : D_(o.D_), alpha_(o.alpha_), B_real_(o.B_real_), B_fx_(o.B_fx_),
          supports_(o.supports_) {}
    GradientCode& operator=(const GradientCode& o);

    int D() const { return D_; }
    int alpha() const { return alpha_; }
    int min_responders() const { return D_ - alpha_ + 1; }
    const Eigen::MatrixXd& B_real() const { return B_real_; }
    const FxMatrix& B_fx() const { return B_fx_; }
    // 0-based device indices {i, i+1, ..., i+alpha-1 mod D}.
    const std::vector<int>& support(int row) const { return supports_[row]; }

    double b_real(int i, int j) const { return B_real_(i, j); }
    FxScalar b_fx(int i, int j) const { return FxScalar{B_fx_.at(i, j), B_fx_.spec()}; }

    // Solves a^T B_rows(received) = all-ones over the selected view; uses the
    // lowest-indexed D-alpha+1 rows when more respond. Results are memoized
    // per (view, used-row set); concurrent lookups are safe and duplicate
    // computes merely waste work.
    DecodeVector decode(const std::vector<int>& received, double tol, BView view) const;

private:
    int D_ = 0;
    int alpha_ = 0;
    Eigen::MatrixXd B_real_;
    FxMatrix B_fx_;
    std::vector<std::vector<int>> supports_;

    mutable std::shared_mutex memo_mutex_;
    mutable std::map<std::pair<int, std::vector<int>>, DecodeVector> memo_;
};

// Randomized cyclic construction: H is an (alpha-1) x D matrix with standard
// normal entries in columns 0..D-2 and last column equal to minus their sum,
// so the all-ones vector lies in null(H). Row i fixes coefficient 1 at
// position i and solves the (alpha-1)-dimensional local system forcing
// H row^T = 0 on the cyclic support. alpha = 1 (identity) and alpha = D
// (all-ones) use their closed forms. Singular or badly scaled local solves
// resample H, up to 16 times, before SingularSystemError.
GradientCode build_code(int D, int alpha, Stream& rng, FixedSpec spec);

// Checks the decode identity over received sets of size D-alpha+1:
// exhaustive when C(D, D-alpha+1) <= exhaustive_limit, otherwise
// `samples` uniformly drawn sets. Failures are reported, not thrown.
VerifyReport verify_code(const GradientCode& code, double tol, BView view, Stream& rng,
                         long exhaustive_limit = 100000, long samples = 10000);

// Self-describing textual form (D, alpha, spec, raw quantized entries).
std::string code_to_json(const GradientCode& code);
GradientCode code_from_json(const std::string& text);

} // namespace cfl
