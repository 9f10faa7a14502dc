#pragma once

// Closed-form model of the two-pass induced-coherence interferometer.
//
// Everything here is pure: no I/O, no randomness, safe to call concurrently.
// Intensities are in arbitrary units; the detector calibration that turns
// them into photoelectrons lives in scan.hpp.

namespace quic::optics {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

/// Energy-conservation tolerance on 1/lambda_pump - 1/lambda_ref - 1/lambda_probe.
inline constexpr double kEnergyResidualTolerance = 1e-7;  // nm^-1

struct SourceSpec {
  double lambda_pump_nm = 532.0;
  double lambda_ref_nm = 893.0;     // signal photons, detected locally
  double lambda_probe_nm = 1316.0;  // idler photons, sent to the object
  double eta = 0.1;                 // single-pass pair-generation amplitude
  double envelope_fwhm_mm = 0.4;    // visibility envelope FWHM in scan distance

  /// Throws DomainError for non-positive wavelengths / width or eta outside (0,1),
  /// PhysicsError if energy conservation is violated.
  void validate() const;

  bool operator==(const SourceSpec&) const = default;
};

/// Round-trip phases accumulated by the probe, reference and pump beams.
struct PhaseState {
  double probe = 0.0;
  double ref = 0.0;
  double pump = 0.0;

  double combined() const noexcept { return probe + ref - pump; }
};

/// Gaussian mode overlap gamma(tau) = exp(-tau^2 / 2 sigma^2).
struct CoherenceModel {
  double sigma_s = 0.0;

  /// sigma such that gamma(2 dz / c) = 1/2 at dz = fwhm / 2.
  static CoherenceModel from_envelope_fwhm(double fwhm_mm);

  bool operator==(const CoherenceModel&) const = default;
};

/// Linearized plane-wave phase-matching response of the crystal to an
/// external (jamming) laser.
struct PhaseMatchSpec {
  double crystal_length_mm = 20.0;
  double dk_per_radian = 1.0;    // um^-1 per rad of angular offset
  double gain_at_match = 4e-5;   // stimulated-PDC intensity per uW of jam power

  void validate() const;

  bool operator==(const PhaseMatchSpec&) const = default;
};

double coherence_gamma(double tau_s, const CoherenceModel& model);

/// Traveling-time difference for a scan displacement: both arms are
/// out-and-back, so tau = 2 dz / c.
double path_delay_to_tau(double delta_z_mm, double speed_of_light_m_per_s = kSpeedOfLight);

/// eta^2 [1 + gamma |r_p| cos(phi_p + phi_r - phi_0)].
double reference_intensity(const SourceSpec& source, double gamma_val, double r_p_abs,
                           const PhaseState& phases);

/// V = |r_p| gamma.
double visibility(double r_p_abs, double gamma_val);

/// Coincidence-detection signal of a quantum-illumination receiver, eta^2 |r_p|^2.
double qi_coincidence_signal(double r_p_abs, double eta);

/// Small-angle regime bound for phase_mismatch.
inline constexpr double kMaxMismatchAngle = 0.1;  // rad

double phase_mismatch(double angle_offset_rad, const PhaseMatchSpec& spec);

/// gain_at_match * P * sinc^2(dk L / 2).
double stimulated_pdc_gain(double delta_k_per_um, const PhaseMatchSpec& spec, double jam_power_uw);

/// sin(x)/x with sinc(0) = 1.
double sinc(double x);

double check_energy_conservation(const SourceSpec& source);

/// Fringe frequency in scan distance, 2 / lambda (um^-1).
double fringe_spatial_frequency(double lambda_nm);

}  // namespace quic::optics
