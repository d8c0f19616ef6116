#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magopt/mesh.hpp"

namespace magopt {

inline constexpr double kNu0Air = 1.0e7 / (4.0 * 3.14159265358979323846);

enum class MaterialMode : std::uint8_t { Linear, Nonlinear };

enum class CurveKind : std::uint8_t { Analytic, Table };

struct BHSample {
    double s = 0.0;   // |B| = |grad u|
    double nu = 0.0;  // reluctivity at s
};

// Scalar reluctivity curve nu_hat(s) for ferromagnetic material, with
// nu_hat(0) = nu1, nu_hat -> nu0 at saturation, nu_hat nondecreasing and
// s -> nu_hat(s)*s strictly increasing.
class BHModel {
  public:
    static BHModel linear(double nu0 = kNu0Air, double nu_r = 1.0 / 5100.0);
    static BHModel analytic(double nu0 = kNu0Air, double nu_r = 1.0 / 5100.0, double s0 = 1.1e6,
                            double exponent = 4.0);
    static BHModel from_table(std::vector<BHSample> samples, double nu0 = kNu0Air,
                              double nu_r = 1.0 / 5100.0);

    double nu0() const { return nu0_; }
    double nu1() const { return nu1_; }
    double nu_r() const { return nu_r_; }
    CurveKind curve_kind() const { return kind_; }

    double nu_hat(double s) const;
    double nu_hat_prime(double s) const;
    // nu_hat'(s)/s with its analytic s->0 limit (finite since nu_hat'(0)=0).
    double nu_hat_prime_over_s(double s) const;

  private:
    BHModel() = default;
    friend BHModel build_bh_table(std::vector<BHSample> samples, double nu0, double nu_r);

    double nu0_ = kNu0Air;
    double nu1_ = kNu0Air / 5100.0;
    double nu_r_ = 1.0 / 5100.0;
    CurveKind kind_ = CurveKind::Analytic;

    // analytic curve: nu0 + (nu1 - nu0) / (1 + (s/s0)^p)
    double s0_ = 1.1e6;
    double exponent_ = 4.0;

    // table curve: monotone cubic (Fritsch-Carlson) through (s_i, nu_i)
    std::vector<double> ts_;
    std::vector<double> tnu_;
    std::vector<double> tslope_;  // Hermite endpoint slopes
};

BHModel build_bh_table(std::vector<BHSample> samples, double nu0 = kNu0Air,
                       double nu_r = 1.0 / 5100.0);
BHModel load_bh_table_csv(const std::string& path, double nu0 = kNu0Air,
                          double nu_r = 1.0 / 5100.0);

// ON/OFF flags for the DESIGN elements of one mesh plus the material mode.
// Flags are indexed by position in mesh.design_elements(). The optional
// single-element coefficient offset supports finite-difference probes.
struct DesignState {
    std::vector<std::uint8_t> flags;  // 1 = ON (iron), 0 = OFF (air)
    MaterialMode mode = MaterialMode::Linear;
    int perturbed_elem = -1;
    double perturb_delta = 0.0;

    static DesignState all_on(const Mesh& mesh, MaterialMode mode);

    bool is_on(int design_pos) const { return flags[static_cast<std::size_t>(design_pos)] != 0; }
    int count_on() const;
};

// Element reluctivity: AIR, MAGNET and OFF-design elements carry nu0;
// IRON and ON-design elements carry nu1 (linear) or nu_hat(s) (nonlinear).
double reluctivity(const BHModel& model, const DesignState& state, const Mesh& mesh, int elem,
                   double s);

// d nu/d s in the element; zero in linear mode and on air-like elements.
double reluctivity_derivative(const BHModel& model, MaterialMode mode, double s);

// True if the element's coefficient depends on |grad u| (iron-like, nonlinear mode).
bool element_is_field_dependent(const DesignState& state, const Mesh& mesh, int elem);

}  // namespace magopt
