#include "cfl/gradcode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>

#include <nlohmann/json.hpp>

#include "cfl/errors.hpp"

namespace cfl {

GradientCode& GradientCode::operator=(const GradientCode& o) {
    if (this == &o) return *this;
    D_ = o.D_;
    alpha_ = o.alpha_;
    B_real_ = o.B_real_;
    B_fx_ = o.B_fx_;
    supports_ = o.supports_;
    std::unique_lock lock(memo_mutex_);
    memo_.clear();
    return *this;
}

namespace {

std::vector<std::vector<int>> cyclic_supports(int D, int alpha) {
    std::vector<std::vector<int>> sup(D);
    for (int i = 0; i < D; ++i) {
        sup[i].reserve(alpha);
        for (int t = 0; t < alpha; ++t) sup[i].push_back((i + t) % D);
    }
    return sup;
}

} // namespace

GradientCode build_code(int D, int alpha, Stream& rng, FixedSpec spec) {
    spec.validate();
    if (D < 1 || alpha < 1 || alpha > D)
        throw ConfigError("code: need 1 <= alpha <= D, got D=" + std::to_string(D) +
                          " alpha=" + std::to_string(alpha));
    auto supports = cyclic_supports(D, alpha);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(D, D);

    if (alpha == 1) {
        B.setIdentity();
    } else if (alpha == D) {
        B.setOnes();
    } else {
        // Large solved coefficients mean the local system was nearly
        // singular; the draw is rejected like an exactly singular one.
        // Keeping them small also bounds how much the code amplifies
        // quantization noise and per-share magnitudes during aggregation.
        const double coef_cap = std::min(32.0, std::exp2(spec.k - spec.f - 1) - 1.0);
        bool done = false;
        for (int attempt = 0; attempt < 16 && !done; ++attempt) {
            Eigen::MatrixXd H(alpha - 1, D);
            for (int r = 0; r < alpha - 1; ++r) {
                double rowsum = 0.0;
                for (int c = 0; c + 1 < D; ++c) {
                    H(r, c) = rng.normal();
                    rowsum += H(r, c);
                }
                H(r, D - 1) = -rowsum; // columns sum to zero => ones in null(H)
            }
            bool ok = true;
            for (int i = 0; i < D && ok; ++i) {
                Eigen::MatrixXd Hsub(alpha - 1, alpha - 1);
                for (int t = 1; t < alpha; ++t) Hsub.col(t - 1) = H.col(supports[i][t]);
                Eigen::FullPivLU<Eigen::MatrixXd> lu(Hsub);
                if (!lu.isInvertible()) {
                    ok = false;
                    break;
                }
                Eigen::VectorXd x = lu.solve(-H.col(supports[i][0]));
                if (x.cwiseAbs().maxCoeff() > coef_cap) {
                    ok = false;
                    break;
                }
                B.row(i).setZero();
                B(i, supports[i][0]) = 1.0;
                for (int t = 1; t < alpha; ++t) B(i, supports[i][t]) = x(t - 1);
            }
            done = ok;
        }
        if (!done)
            throw SingularSystemError("code construction stayed singular after 16 redraws (D=" +
                                      std::to_string(D) + ", alpha=" + std::to_string(alpha) + ")");
    }

    FxMatrix B_fx = encode_matrix(B, spec);
    // Off-support entries must be bit-exact zeros in both copies.
    for (int i = 0; i < D; ++i) {
        std::set<int> on(supports[i].begin(), supports[i].end());
        for (int j = 0; j < D; ++j)
            if (!on.count(j)) {
                B(i, j) = 0.0;
                B_fx.at(i, j) = 0;
            }
    }
    return GradientCode(D, alpha, std::move(B), std::move(B_fx), std::move(supports));
}

DecodeVector GradientCode::decode(const std::vector<int>& received, double tol, BView view) const {
    const int need = min_responders();
    if (static_cast<int>(received.size()) < need)
        throw InsufficientDevicesError("decode needs " + std::to_string(need) + " responders, got " +
                                       std::to_string(received.size()));
    std::vector<int> rows(received);
    std::sort(rows.begin(), rows.end());
    if (std::adjacent_find(rows.begin(), rows.end()) != rows.end())
        throw DimensionError("decode: duplicate device index in received set");
    if (rows.front() < 0 || rows.back() >= D_)
        throw DimensionError("decode: device index out of range");
    rows.resize(need); // lowest-indexed minimum subset

    const std::pair<int, std::vector<int>> key{static_cast<int>(view), rows};
    {
        std::shared_lock lock(memo_mutex_);
        auto it = memo_.find(key);
        if (it != memo_.end()) {
            if (it->second.residual > tol)
                throw ResidualToleranceError("decode residual " + std::to_string(it->second.residual) +
                                             " exceeds tolerance " + std::to_string(tol));
            return it->second;
        }
    }

    Eigen::MatrixXd Bv = (view == BView::Real) ? B_real_ : decode_matrix(B_fx_);
    Eigen::MatrixXd rowsmat(need, D_);
    for (int r = 0; r < need; ++r) rowsmat.row(r) = Bv.row(rows[r]);

    Eigen::VectorXd ones = Eigen::VectorXd::Ones(D_);
    Eigen::VectorXd a = rowsmat.transpose().colPivHouseholderQr().solve(ones);

    DecodeVector out;
    out.coefficients = a;
    out.rows_used = rows;
    out.residual = (rowsmat.transpose() * a - ones).cwiseAbs().maxCoeff();

    {
        std::unique_lock lock(memo_mutex_);
        memo_.emplace(key, out);
    }
    if (out.residual > tol)
        throw ResidualToleranceError("decode residual " + std::to_string(out.residual) +
                                     " exceeds tolerance " + std::to_string(tol));
    return out;
}

namespace {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace

VerifyReport verify_code(const GradientCode& code, double tol, BView view, Stream& rng,
                         long exhaustive_limit, long samples) {
    const int D = code.D();
    const int need = code.min_responders();
    VerifyReport rep;

    auto test_set = [&](const std::vector<int>& set) {
        DecodeVector dv;
        try {
            dv = code.decode(set, std::numeric_limits<double>::infinity(), view);
        } catch (const Error&) {
            ++rep.failures;
            ++rep.sets_tested;
            return;
        }
        rep.max_residual = std::max(rep.max_residual, dv.residual);
        if (dv.residual > tol) ++rep.failures;
        ++rep.sets_tested;
    };

    if (binomial(D, need) <= static_cast<double>(exhaustive_limit)) {
        rep.exhaustive = true;
        std::vector<int> set(need);
        for (int i = 0; i < need; ++i) set[i] = i;
        for (;;) {
            test_set(set);
            int pos = need - 1;
            while (pos >= 0 && set[pos] == D - need + pos) --pos;
            if (pos < 0) break;
            ++set[pos];
            for (int q = pos + 1; q < need; ++q) set[q] = set[q - 1] + 1;
        }
    } else {
        rep.exhaustive = false;
        std::vector<int> all(D);
        for (int i = 0; i < D; ++i) all[i] = i;
        for (long s = 0; s < samples; ++s) {
            // Partial Fisher-Yates: first `need` entries become the sample.
            for (int i = 0; i < need; ++i) {
                int j = static_cast<int>(rng.uniform_int(i, D - 1));
                std::swap(all[i], all[j]);
            }
            test_set(std::vector<int>(all.begin(), all.begin() + need));
        }
    }
    return rep;
}

std::string code_to_json(const GradientCode& code) {
    nlohmann::json j;
    j["D"] = code.D();
    j["alpha"] = code.alpha();
    j["k"] = code.B_fx().spec().k;
    j["f"] = code.B_fx().spec().f;
    j["raw"] = code.B_fx().raw();
    return j.dump();
}

GradientCode code_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw FormatError("code dump: invalid JSON");
    try {
        int D = j.at("D").get<int>();
        int alpha = j.at("alpha").get<int>();
        FixedSpec spec{j.at("k").get<int>(), j.at("f").get<int>()};
        spec.validate();
        auto raw = j.at("raw").get<std::vector<std::int64_t>>();
        if (static_cast<std::size_t>(D) * D != raw.size())
            throw FormatError("code dump: raw length " + std::to_string(raw.size()) +
                              " does not match D=" + std::to_string(D));
        FxMatrix B_fx(D, D, spec);
        B_fx.raw() = std::move(raw);
        // Decode before handing B_fx over: argument evaluation order is
        // unspecified, so the move must not race the read.
        Eigen::MatrixXd B_real = decode_matrix(B_fx);
        return GradientCode(D, alpha, std::move(B_real), std::move(B_fx),
                            cyclic_supports(D, alpha));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("code dump: ") + e.what());
    }
}

} // namespace cfl
