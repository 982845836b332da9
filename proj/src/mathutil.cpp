#include "gpabc/mathutil.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace gpabc {

double log_norm_cdf(double x) {
  if (x > -1.0) {
    return std::log1p(-0.5 * std::erfc(x * M_SQRT1_2));
  }
  if (x > -20.0) {
    return std::log(0.5 * std::erfc(-x * M_SQRT1_2));
  }
  // Asymptotic expansion of the Mills ratio for the far lower tail.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * kLog2Pi + std::log(series);
}

// Wichura (1988), algorithm AS241, PPND16.
double norm_cdf_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("norm_cdf_inv: p must be in (0,1)");
  }
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double student_t_logpdf(double x, double location, double scale, double dof) {
  const double z = (x - location) / scale;
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * M_PI) - std::log(scale) -
         0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

double student_t_logpdf_dx(double x, double location, double scale, double dof) {
  const double d = x - location;
  return -(dof + 1.0) * d / (dof * scale * scale + d * d);
}

std::vector<double> sorted_copy(const std::vector<double>& v) {
  std::vector<double> s(v);
  std::sort(s.begin(), s.end());
  return s;
}

std::vector<double> trimmed_values(const std::vector<double>& v, double trim) {
  const auto s = sorted_copy(v);
  const std::size_t k =
      static_cast<std::size_t>(std::floor(0.5 * trim * static_cast<double>(s.size())));
  if (2 * k >= s.size()) return s;
  return std::vector<double>(s.begin() + static_cast<std::ptrdiff_t>(k),
                             s.end() - static_cast<std::ptrdiff_t>(k));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double trimmed_mean(const std::vector<double>& v, double trim) {
  return mean_of(trimmed_values(v, trim));
}

double trimmed_sd(const std::vector<double>& v, double trim) {
  return std::sqrt(variance_of(trimmed_values(v, trim)));
}

double trimmed_variance(const std::vector<double>& v, double trim) {
  return variance_of(trimmed_values(v, trim));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const double GaussHermite32::nodes[32] = {
    -7.12581390983072804e+00, -6.40949814926966077e+00, -5.81222594951591365e+00,
    -5.27555098651588050e+00, -4.77716450350259603e+00, -4.30554795335119866e+00,
    -3.85375548547144486e+00, -3.41716749281857091e+00, -2.99249082500237407e+00,
    -2.57724953773231746e+00, -2.16949918360611216e+00, -1.76765410946320145e+00,
    -1.37037641095287177e+00, -9.76500463589682788e-01, -5.84978765435932413e-01,
    -1.94840741569399345e-01, +1.94840741569399345e-01, +5.84978765435932413e-01,
    +9.76500463589682788e-01, +1.37037641095287177e+00, +1.76765410946320145e+00,
    +2.16949918360611216e+00, +2.57724953773231746e+00, +2.99249082500237407e+00,
    +3.41716749281857091e+00, +3.85375548547144486e+00, +4.30554795335119866e+00,
    +4.77716450350259603e+00, +5.27555098651588050e+00, +5.81222594951591365e+00,
    +6.40949814926966077e+00, +7.12581390983072804e+00};

const double GaussHermite32::weights[32] = {
    +7.31067642738409573e-23, +9.23173653651825780e-19, +1.19734401709285026e-15,
    +4.21501021132641555e-13, +5.93329146339667624e-11, +4.09883216477087927e-09,
    +1.57416779254558817e-07, +3.65058512956237819e-06, +5.41658406181999070e-05,
    +5.36268365527972049e-04, +3.65489032665442621e-03, +1.75534288315734380e-02,
    +6.04581309559126881e-02, +1.51269734076642320e-01, +2.77458142302529964e-01,
    +3.75238352592802471e-01, +3.75238352592802471e-01, +2.77458142302529964e-01,
    +1.51269734076642320e-01, +6.04581309559126881e-02, +1.75534288315734380e-02,
    +3.65489032665442621e-03, +5.36268365527972049e-04, +5.41658406181999070e-05,
    +3.65058512956237819e-06, +1.57416779254558817e-07, +4.09883216477087927e-09,
    +5.93329146339667624e-11, +4.21501021132641555e-13, +1.19734401709285026e-15,
    +9.23173653651825780e-19, +7.31067642738409573e-23};

double gauss_hermite_logistic_mean(double mean, double var) {
  const double s = std::sqrt(2.0 * std::max(var, 0.0));
  double acc = 0.0;
  for (int i = 0; i < 32; ++i) {
    acc += GaussHermite32::weights[i] * logistic(mean + s * GaussHermite32::nodes[i]);
  }
  return acc / std::sqrt(M_PI);
}

}  // namespace gpabc
