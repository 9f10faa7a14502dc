#include "quic/optics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

#include "quic/error.hpp"

namespace quic::optics {
namespace {

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

void require_unit(double v, const char* name) {
  if (!in_unit_interval(v)) {
    throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

}  // namespace

void SourceSpec::validate() const {
  if (!(lambda_pump_nm > 0.0) || !(lambda_ref_nm > 0.0) || !(lambda_probe_nm > 0.0)) {
    throw DomainError("wavelengths must be positive");
  }
  if (!(eta > 0.0 && eta < 1.0)) {
    throw DomainError("eta must lie in (0, 1), got " + std::to_string(eta));
  }
  if (!(envelope_fwhm_mm > 0.0) || !std::isfinite(envelope_fwhm_mm)) {
    throw DomainError("envelope_fwhm_mm must be positive");
  }
  const double residual = check_energy_conservation(*this);
  if (std::abs(residual) > kEnergyResidualTolerance) {
    std::ostringstream msg;
    msg << std::setprecision(4) << "energy conservation violated: 1/lambda_pump - 1/lambda_ref - 1/lambda_probe = "
        << residual << " nm^-1 (tolerance 1e-7)";
    throw PhysicsError(msg.str());
  }
}

void PhaseMatchSpec::validate() const {
  if (!(crystal_length_mm > 0.0)) throw DomainError("crystal_length_mm must be positive");
  if (!(gain_at_match >= 0.0)) throw DomainError("gain_at_match must be non-negative");
  if (!std::isfinite(dk_per_radian)) throw DomainError("dk_per_radian must be finite");
}

CoherenceModel CoherenceModel::from_envelope_fwhm(double fwhm_mm) {
  if (!(fwhm_mm > 0.0)) throw DomainError("envelope FWHM must be positive");
  // gamma(tau) = 1/2  <=>  tau = sigma sqrt(2 ln 2), and tau = 2 (fwhm/2) / c.
  const double fwhm_m = fwhm_mm * 1e-3;
  return CoherenceModel{fwhm_m / (kSpeedOfLight * std::sqrt(2.0 * std::log(2.0)))};
}

double coherence_gamma(double tau_s, const CoherenceModel& model) {
  const double u = tau_s / model.sigma_s;
  return std::exp(-0.5 * u * u);
}

double path_delay_to_tau(double delta_z_mm, double speed_of_light_m_per_s) {
  return 2.0 * delta_z_mm * 1e-3 / speed_of_light_m_per_s;
}

double reference_intensity(const SourceSpec& source, double gamma_val, double r_p_abs,
                           const PhaseState& phases) {
  require_unit(gamma_val, "gamma");
  require_unit(r_p_abs, "|r_p|");
  const double eta2 = source.eta * source.eta;
  return eta2 * (1.0 + gamma_val * r_p_abs * std::cos(phases.combined()));
}

double visibility(double r_p_abs, double gamma_val) {
  require_unit(r_p_abs, "|r_p|");
  require_unit(gamma_val, "gamma");
  return r_p_abs * gamma_val;
}

double qi_coincidence_signal(double r_p_abs, double eta) {
  require_unit(r_p_abs, "|r_p|");
  require_unit(eta, "eta");
  return eta * eta * r_p_abs * r_p_abs;
}

double phase_mismatch(double angle_offset_rad, const PhaseMatchSpec& spec) {
  if (!(std::abs(angle_offset_rad) < kMaxMismatchAngle)) {
    throw DomainError("angle offset " + std::to_string(angle_offset_rad) +
                      " rad is outside the small-angle regime (|angle| < 0.1 rad)");
  }
  return spec.dk_per_radian * angle_offset_rad;
}

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double stimulated_pdc_gain(double delta_k_per_um, const PhaseMatchSpec& spec, double jam_power_uw) {
  if (!(jam_power_uw >= 0.0)) throw DomainError("jam power must be non-negative");
  const double half_phase = 0.5 * delta_k_per_um * spec.crystal_length_mm * 1e3;
  const double s = sinc(half_phase);
  return spec.gain_at_match * jam_power_uw * s * s;
}

double check_energy_conservation(const SourceSpec& source) {
  return 1.0 / source.lambda_pump_nm - 1.0 / source.lambda_ref_nm - 1.0 / source.lambda_probe_nm;
}

double fringe_spatial_frequency(double lambda_nm) {
  if (!(lambda_nm > 0.0)) throw DomainError("wavelength must be positive");
  return 2.0 / (lambda_nm * 1e-3);
}

}  // namespace quic::optics
