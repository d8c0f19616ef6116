#include "magopt/materials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "magopt/errors.hpp"

namespace magopt {

BHModel BHModel::linear(double nu0, double nu_r) {
    // The curve is inert in linear mode; keep the analytic default so the
    // model stays usable if the mode is flipped.
    return analytic(nu0, nu_r);
}

BHModel BHModel::analytic(double nu0, double nu_r, double s0, double exponent) {
    if (!(nu0 > 0.0)) throw ValidationError("BHModel: nu0 must be positive");
    if (!(nu_r > 0.0) || nu_r > 1.0) throw ValidationError("BHModel: nu_r must lie in (0, 1]");
    if (!(s0 > 0.0)) throw ValidationError("BHModel: s0 must be positive");
    if (exponent < 2.0) throw ValidationError("BHModel: exponent must be >= 2 (flat start)");
    BHModel m;
    m.nu0_ = nu0;
    m.nu_r_ = nu_r;
    m.nu1_ = nu0 * nu_r;
    m.kind_ = CurveKind::Analytic;
    m.s0_ = s0;
    m.exponent_ = exponent;
    return m;
}

BHModel BHModel::from_table(std::vector<BHSample> samples, double nu0, double nu_r) {
    return build_bh_table(std::move(samples), nu0, nu_r);
}

double BHModel::nu_hat(double s) const {
    if (!(s >= 0.0)) throw ValidationError("nu_hat: s must be nonnegative and finite");
    if (kind_ == CurveKind::Analytic) {
        return nu0_ + (nu1_ - nu0_) / (1.0 + std::pow(s / s0_, exponent_));
    }
    if (s <= ts_.front()) return tnu_.front();
    if (s >= ts_.back()) return tnu_.back();
    const auto it = std::upper_bound(ts_.begin(), ts_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - ts_.begin()) - 1;
    const double h = ts_[i + 1] - ts_[i];
    const double t = (s - ts_[i]) / h;
    const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    const double h10 = t * (1.0 - t) * (1.0 - t);
    const double h01 = t * t * (3.0 - 2.0 * t);
    const double h11 = t * t * (t - 1.0);
    const double v = h00 * tnu_[i] + h10 * h * tslope_[i] + h01 * tnu_[i + 1] +
                     h11 * h * tslope_[i + 1];
    return std::clamp(v, nu1_, nu0_);
}

double BHModel::nu_hat_prime(double s) const {
    if (!(s >= 0.0)) throw ValidationError("nu_hat_prime: s must be nonnegative and finite");
    if (kind_ == CurveKind::Analytic) {
        const double x = s / s0_;
        if (x == 0.0) return 0.0;
        const double xp = std::pow(x, exponent_);
        const double denom = (1.0 + xp) * (1.0 + xp);
        return (nu0_ - nu1_) * exponent_ * xp / (x * s0_ * denom);
    }
    if (s <= ts_.front() || s >= ts_.back()) return 0.0;
    const auto it = std::upper_bound(ts_.begin(), ts_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - ts_.begin()) - 1;
    const double h = ts_[i + 1] - ts_[i];
    const double t = (s - ts_[i]) / h;
    const double dh00 = 6.0 * t * (t - 1.0);
    const double dh10 = (1.0 - t) * (1.0 - 3.0 * t);
    const double dh01 = -dh00;
    const double dh11 = t * (3.0 * t - 2.0);
    const double d = (dh00 * tnu_[i] + dh01 * tnu_[i + 1]) / h + dh10 * tslope_[i] +
                     dh11 * tslope_[i + 1];
    return std::max(d, 0.0);
}

double BHModel::nu_hat_prime_over_s(double s) const {
    if (kind_ == CurveKind::Analytic) {
        const double x = s / s0_;
        // nu_hat'(s)/s = (nu0-nu1) p x^(p-2) / (s0^2 (1+x^p)^2); finite limit at 0.
        if (x < 1e-150) {
            if (exponent_ > 2.0) return 0.0;
            return (nu0_ - nu1_) * exponent_ / (s0_ * s0_);
        }
        const double xp = std::pow(x, exponent_);
        const double denom = (1.0 + xp) * (1.0 + xp);
        return (nu0_ - nu1_) * exponent_ * xp / (x * x * s0_ * s0_ * denom);
    }
    // Hermite piece with clamped zero slope at the first knot: nu'(s)/s has a
    // bounded limit given by the piece's second derivative at the knot.
    const double s_lo = ts_.front();
    if (s <= s_lo) return 0.0;
    const double eps = 1e-9 * (ts_.back() - ts_.front());
    if (s < s_lo + eps) {
        const double h = ts_[1] - ts_[0];
        // f''(s_lo) of the cubic Hermite piece with f'(s_lo) = 0
        const double second = (6.0 * (tnu_[1] - tnu_[0]) / h - 2.0 * tslope_[1] -
                               4.0 * tslope_[0]) / h;
        return std::max(second, 0.0);
    }
    return nu_hat_prime(s) / s;
}

BHModel build_bh_table(std::vector<BHSample> samples, double nu0, double nu_r) {
    if (!(nu0 > 0.0)) throw ValidationError("build_bh_table: nu0 must be positive");
    if (!(nu_r > 0.0) || nu_r > 1.0) {
        throw ValidationError("build_bh_table: nu_r must lie in (0, 1]");
    }
    const double nu1 = nu0 * nu_r;
    if (samples.size() < 2) throw ValidationError("build_bh_table: need at least 2 samples");
    constexpr double kEndpointTol = 1e-9;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& smp = samples[i];
        if (!(smp.s >= 0.0) || !std::isfinite(smp.s) || !std::isfinite(smp.nu)) {
            throw ValidationError("build_bh_table: sample " + std::to_string(i) +
                                  " is not finite/nonnegative");
        }
        if (smp.nu < 0.0 || smp.nu > nu0 * (1.0 + kEndpointTol)) {
            throw ValidationError("build_bh_table: sample " + std::to_string(i) +
                                  " outside [0, nu0]");
        }
        if (i > 0) {
            if (!(samples[i - 1].s < smp.s)) {
                throw ValidationError("build_bh_table: samples must be strictly increasing in s "
                                      "(sample " + std::to_string(i) + ")");
            }
            if (!(samples[i - 1].nu < smp.nu)) {
                throw ValidationError("build_bh_table: samples must be strictly increasing in nu "
                                      "(sample " + std::to_string(i) + ")");
            }
        }
    }
    if (samples.front().nu < nu1 * (1.0 - 1e-6)) {
        throw ValidationError("build_bh_table: first sample must start at nu1");
    }

    BHModel m;
    m.nu0_ = nu0;
    m.nu_r_ = nu_r;
    m.nu1_ = nu1;
    m.kind_ = CurveKind::Table;

    const std::size_t n = samples.size();
    m.ts_.resize(n);
    m.tnu_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.ts_[i] = samples[i].s;
        m.tnu_[i] = std::clamp(samples[i].nu, nu1, nu0);
    }

    // Fritsch-Carlson slopes keep the interpolant monotone; the first slope is
    // clamped to zero so nu'(s)/s stays bounded at s = 0.
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        delta[i] = (m.tnu_[i + 1] - m.tnu_[i]) / (m.ts_[i + 1] - m.ts_[i]);
    }
    m.tslope_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        m.tslope_[i] = 0.5 * (delta[i - 1] + delta[i]);
    }
    m.tslope_[0] = 0.0;
    m.tslope_[n - 1] = delta[n - 2];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            m.tslope_[i] = 0.0;
            m.tslope_[i + 1] = 0.0;
            continue;
        }
        const double a = m.tslope_[i] / delta[i];
        const double b = m.tslope_[i + 1] / delta[i];
        const double r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double tfac = 3.0 / std::sqrt(r2);
            m.tslope_[i] = tfac * a * delta[i];
            m.tslope_[i + 1] = tfac * b * delta[i];
        }
    }
    m.tslope_[0] = 0.0;
    return m;
}

BHModel load_bh_table_csv(const std::string& path, double nu0, double nu_r) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open B-H table '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("B-H table '" + path + "' is empty");
    // strip optional BOM / whitespace
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line != "s,nu") {
        throw ValidationError("B-H table '" + path + "': expected header 's,nu'");
    }
    std::vector<BHSample> samples;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        BHSample smp;
        if (!(ss >> smp.s >> smp.nu)) {
            throw ValidationError("B-H table '" + path + "' line " + std::to_string(line_no) +
                                  ": bad row");
        }
        samples.push_back(smp);
    }
    return build_bh_table(std::move(samples), nu0, nu_r);
}

DesignState DesignState::all_on(const Mesh& mesh, MaterialMode mode) {
    DesignState st;
    st.flags.assign(mesh.design_elements().size(), 1);
    st.mode = mode;
    return st;
}

int DesignState::count_on() const {
    int n = 0;
    for (auto f : flags) n += (f != 0);
    return n;
}

double reluctivity(const BHModel& model, const DesignState& state, const Mesh& mesh, int elem,
                   double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
        throw ValidationError("reluctivity: s must be nonnegative and finite");
    }
    const Triangle& t = mesh.triangle(elem);
    bool iron_like = false;
    if (t.region == Region::Iron) {
        iron_like = true;
    } else if (t.region == Region::Design) {
        iron_like = state.is_on(mesh.design_index(elem));
    }
    double nu = model.nu0();
    if (iron_like) {
        nu = (state.mode == MaterialMode::Linear) ? model.nu1() : model.nu_hat(s);
    }
    if (elem == state.perturbed_elem) nu += state.perturb_delta;
    return nu;
}

double reluctivity_derivative(const BHModel& model, MaterialMode mode, double s) {
    if (mode == MaterialMode::Linear) return 0.0;
    return model.nu_hat_prime(s);
}

bool element_is_field_dependent(const DesignState& state, const Mesh& mesh, int elem) {
    if (state.mode == MaterialMode::Linear) return false;
    const Triangle& t = mesh.triangle(elem);
    if (t.region == Region::Iron) return true;
    if (t.region == Region::Design) return state.is_on(mesh.design_index(elem));
    return false;
}

}  // namespace magopt
