"""Quantum-induced-coherence LiDAR simulator and analysis."""

from ._quic_lidar import (
    DomainError,
    IoError,
    ParseError,
    PhysicsError,
    QuicError,
    ResourceError,
    Scenario,
    SchemaError,
    check_energy_conservation,
    coherence_gamma,
    curve_fwhm,
    find_surface_peaks,
    fringe_spatial_frequency,
    noise_level_db,
    path_delay_to_tau,
    qi_coincidence_signal,
    reference_intensity,
    run_jamming,
    run_noise_sweep,
    run_ranging,
    simulate_pixel,
    spectral_snr,
    stft_visibility,
    stimulated_pdc_gain,
    visibility,
)

__version__ = "0.1.0"
