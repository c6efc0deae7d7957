#pragma once

// Modified Bessel function of the first kind, evaluated in log space.
//
// The working quantity is the scaled value ln I_nu(x) - x, which stays
// representable far past the x ~ 700 overflow point of I_nu itself and makes
// differences of the form ln I(a) - ln I(b) - ln I(c) cheap to stabilize.
// Three evaluation regimes cover nu in [0, ~1e4], x in [0, 1e8]:
//   - ascending power series while its peak term index stays small,
//   - Olver's uniform large-order expansion for large nu,
//   - the large-argument (Hankel) expansion for large x with small nu.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vmfc {

enum class BesselRegime { series, uniform_asymptotic, large_argument };

namespace detail {

inline void check_bessel_domain(double nu, double x, const char* who) {
    if (!(nu >= 0.0))
        throw std::domain_error(std::string(who) + ": order must be >= 0");
    if (!(x >= 0.0))
        throw std::domain_error(std::string(who) + ": argument must be >= 0");
}

constexpr double kSeriesPeakMax = 300.0;   // largest admissible peak term index
constexpr int    kSeriesCap     = 500;
constexpr double kSeriesTol     = 1e-17;   // term / running sum cutoff
constexpr double kUniformNuMin  = 30.0;

// Index of the largest term of the ascending series for I_nu(x).
inline double series_peak_index(double nu, double x) {
    return 0.5 * (std::hypot(nu, x) - nu);
}

// ln I_nu(x) - x by the ascending series. All terms are positive, so the sum
// is cancellation-free; it is rescaled by powers of two to dodge overflow.
inline double series_log_i_scaled(double nu, double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    long twoscale = 0;
    for (int k = 1; k <= kSeriesCap; ++k) {
        term *= q / (k * (nu + k));
        sum += term;
        if (sum > 0x1.0p+512) {
            sum = std::ldexp(sum, -512);
            term = std::ldexp(term, -512);
            twoscale += 512;
        }
        if (term < kSeriesTol * sum) break;
    }
    const double log_sum = std::log(sum) + static_cast<double>(twoscale) * M_LN2;
    return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + log_sum - x;
}

// Olver's uniform asymptotic expansion coefficients u_k(t) with
// t = 1/sqrt(1+z^2); entry j of row k multiplies t^(k+2j).
constexpr int kOlverTerms = 11;
constexpr double kOlverU0[] = {1.00000000000000000000e+0};
constexpr double kOlverU1[] = {1.25000000000000000000e-1, -2.08333333333333333333e-1};
constexpr double kOlverU2[] = {7.03125000000000000000e-2, -4.01041666666666666667e-1, 3.34201388888888888889e-1};
constexpr double kOlverU3[] = {7.32421875000000000000e-2, -8.91210937500000000000e-1, 1.84646267361111111111e+0, -1.02581259645061728395e+0};
constexpr double kOlverU4[] = {1.12152099609375000000e-1, -2.36408691406250000000e+0, 8.78912353515625000000e+0, -1.12070026162229938272e+1, 4.66958442342624742798e+0};
constexpr double kOlverU5[] = {2.27108001708984375000e-1, -7.36879435947963169643e+0, 4.25349987453884548611e+1, -9.18182415432400173611e+1, 8.46362176746007346322e+1, -2.82120725582002448774e+1};
constexpr double kOlverU6[] = {5.72501420974731445312e-1, -2.64914304869515555246e+1, 2.18190511744211590479e+2, -6.99579627376132541233e+2, 1.05999045252799987793e+3, -7.65252468141181642300e+2, 2.12570130039217122861e+2};
constexpr double kOlverU7[] = {1.72772750258445739746e+0, -1.08090919788394655500e+2, 1.20090291321635246277e+3, -5.30564697861340310838e+3, 1.16553933368645332478e+4, -1.35865500064341374386e+4, 8.06172218173730938450e+3, -1.91945766231840699631e+3};
constexpr double kOlverU8[] = {6.07404200127348303795e+0, -4.93915304773088012423e+2, 7.10951430248936372144e+3, -4.11926549688975512981e+4, 1.22200464983017459788e+5, -2.03400177280415534278e+5, 1.92547001232531532359e+5, -9.69805983886375134886e+4, 2.02042913309661486434e+4};
constexpr double kOlverU9[] = {2.43805296995560638606e+1, -2.49983048181120962412e+3, 4.52187689813627262733e+4, -3.31645172484563577832e+5, 1.26836527332162478163e+6, -2.81356322658653411071e+6, 3.76327129765640399640e+6, -2.99801591853810675009e+6, 1.31176361466297720068e+6, -2.42919187900551333458e+5};
constexpr double kOlverU10[] = {1.10017140269246738171e+2, -1.38860897537170405320e+4, 3.08186404612662398480e+5, -2.78561812808645468896e+6, 1.32887671664218183294e+7, -3.75671766607633513082e+7, 6.63445122747290266648e+7, -7.41051482115326577483e+7, 5.09526024926646422064e+7, -1.97068191184322269268e+7, 3.28446985307203782114e+6};
constexpr const double* kOlverU[kOlverTerms] = {
    kOlverU0, kOlverU1, kOlverU2, kOlverU3, kOlverU4, kOlverU5,
    kOlverU6, kOlverU7, kOlverU8, kOlverU9, kOlverU10};

inline double olver_u(int k, double t) {
    const double t2 = t * t;
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= t;
    double acc = 0.0;
    double tk = p;  // t^(k+2j)
    for (int j = 0; j <= k; ++j) {
        acc += kOlverU[k][j] * tk;
        tk *= t2;
    }
    return acc;
}

// ln I_nu(x) - x for large nu, uniformly in z = x/nu.
inline double uniform_log_i_scaled(double nu, double x) {
    const double z = x / nu;
    const double s = std::hypot(1.0, z);           // sqrt(1+z^2)
    const double t = 1.0 / s;
    // eta - z  with  eta = s + ln(z/(1+s)); written to avoid cancellation
    const double eta_minus_z = 1.0 / (s + z) - std::log1p((1.0 + 1.0 / (s + z)) / z);
    double sum = 0.0;
    double nupow = 1.0;
    for (int k = 0; k < kOlverTerms; ++k) {
        const double u = olver_u(k, t) / nupow;
        sum += u;
        nupow *= nu;
        if (k > 0 && std::fabs(u) < 1e-17 * std::fabs(sum)) break;
    }
    return -0.5 * std::log(2.0 * M_PI * nu) - 0.5 * std::log(s) +
           nu * eta_minus_z + std::log(sum);
}

// Hankel expansion sum  1 - (4nu^2-1)/(8x) + ... ; valid for x >> nu^2.
inline double hankel_sum(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 64; ++k) {
        const double odd = 2.0 * k + 1.0;
        term *= -(mu - odd * odd) / (8.0 * x * (k + 1.0));
        if (std::fabs(term) >= prev) break;  // asymptotic tail turned around
        prev = std::fabs(term);
        sum += term;
        if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
    }
    return sum;
}

inline double hankel_log_i_scaled(double nu, double x) {
    return -0.5 * std::log(2.0 * M_PI * x) + std::log(hankel_sum(nu, x));
}

// Gautschi-style continued fraction for I_{nu+1}(x)/I_nu(x), modified Lentz.
inline double ratio_continued_fraction(double nu, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    double f = tiny;
    double c = f;
    double d = 0.0;
    const double x2 = x * x;
    for (int k = 1; k <= 4'000'000; ++k) {
        const double a = (k == 1) ? x : x2;
        const double b = 2.0 * (nu + k);
        d = b + a * d;
        if (d == 0.0) d = tiny;
        c = b + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < eps) return f;
    }
    throw std::runtime_error("bessel_ratio: continued fraction failed to converge");
}

}  // namespace detail

// Which expansion evaluates ln I_nu(kappa); exposed so the regime boundaries
// can be probed directly.
inline BesselRegime bessel_regime(double nu, double kappa) {
    detail::check_bessel_domain(nu, kappa, "bessel_regime");
    if (detail::series_peak_index(nu, kappa) <= detail::kSeriesPeakMax)
        return BesselRegime::series;
    if (nu >= detail::kUniformNuMin) return BesselRegime::uniform_asymptotic;
    return BesselRegime::large_argument;
}

// ln I_nu(kappa) - kappa. Finite for all kappa > 0 up to ~1e8; equals
// log_bessel_i(nu, kappa) - kappa exactly by construction.
inline double log_bessel_i_scaled(double nu, double kappa) {
    detail::check_bessel_domain(nu, kappa, "log_bessel_i_scaled");
    if (kappa == 0.0)
        return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    switch (bessel_regime(nu, kappa)) {
        case BesselRegime::series:
            return detail::series_log_i_scaled(nu, kappa);
        case BesselRegime::uniform_asymptotic:
            return detail::uniform_log_i_scaled(nu, kappa);
        case BesselRegime::large_argument:
        default:
            return detail::hankel_log_i_scaled(nu, kappa);
    }
}

// ln I_nu(kappa); -inf at kappa = 0 for nu > 0, 0 for nu = 0.
inline double log_bessel_i(double nu, double kappa) {
    detail::check_bessel_domain(nu, kappa, "log_bessel_i");
    if (kappa == 0.0)
        return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return log_bessel_i_scaled(nu, kappa) + kappa;
}

// R_nu(kappa) = I_{nu+1}(kappa)/I_nu(kappa), in [0, 1). This is the
// derivative kernel of ln I_nu:  d/dkappa ln I_nu(kappa) = R + nu/kappa.
inline double bessel_ratio(double nu, double kappa) {
    detail::check_bessel_domain(nu, kappa, "bessel_ratio");
    if (kappa == 0.0) return 0.0;
    if (kappa <= 1e4) return detail::ratio_continued_fraction(nu, kappa);
    if (kappa >= 2.0 * nu * nu)
        return detail::hankel_sum(nu + 1.0, kappa) / detail::hankel_sum(nu, kappa);
    // large nu, large kappa: both orders sit in the uniform regime
    return std::exp(detail::uniform_log_i_scaled(nu + 1.0, kappa) -
                    detail::uniform_log_i_scaled(nu, kappa));
}

}  // namespace vmfc
