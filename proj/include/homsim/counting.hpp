#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/rng.hpp"
#include "homsim/sources.hpp"

// Monte Carlo emulation of the four-fold coincidence experiment: pulsed pair
// emission, Raman noise, gated detectors with darks, beam-splitter
// statistics, blocked-arm backgrounds and Poisson error bars.
//
// Efficiency semantics (anchored to the published rate table):
//  - signal detectors carry the total heralding-arm efficiency eta_s, so
//    trigger rate = rep * mu * eta_s;
//  - idler detectors carry the conditional per-detector efficiency eta_i of
//    that source's idler measured through the 50:50 splitter (coincidence
//    rate / trigger rate), so the post-splitter chain efficiency is
//    g = 2 * eta_i.

namespace homsim {

struct DetectorSpec {
    double efficiency = 0.0;
    double dark_prob_per_gate = 0.0;
    bool gated = false;

    void validate() const {
        if (efficiency < 0.0 || efficiency > 1.0)
            throw InvalidInputError("DetectorSpec: efficiency outside [0, 1]");
        if (dark_prob_per_gate < 0.0 || dark_prob_per_gate >= 1.0)
            throw InvalidInputError("DetectorSpec: dark probability outside [0, 1)");
    }
};

struct ExperimentConfig {
    SourceSpec source_a;  // MF side
    SourceSpec source_b;  // PPLN/W side
    DetectorSpec det_signal_a, det_signal_b;
    DetectorSpec det_idler_a, det_idler_b;
    double splitter_reflectivity = 0.5;
    double acquisition_per_point_min = 0.0;
    std::vector<double> delays_ps;
    std::uint64_t rng_seed = 0;

    std::vector<std::string> validate() const {
        auto warnings = source_a.validate();
        auto wb = source_b.validate();
        warnings.insert(warnings.end(), wb.begin(), wb.end());
        det_signal_a.validate();
        det_signal_b.validate();
        det_idler_a.validate();
        det_idler_b.validate();
        if (splitter_reflectivity <= 0.0 || splitter_reflectivity >= 1.0)
            throw InvalidInputError("ExperimentConfig: splitter reflectivity outside (0, 1)");
        if (acquisition_per_point_min <= 0.0)
            throw InvalidInputError("ExperimentConfig: acquisition time must be > 0");
        if (delays_ps.empty())
            throw InvalidInputError("ExperimentConfig: delay list must not be empty");
        if (std::abs(pulses_a() - pulses_b()) > 1e-6)
            throw InvalidInputError("ExperimentConfig: sources must share the pump repetition rate");
        return warnings;
    }

    double pulses_a() const {
        return source_a.pump.pulses_per_minute() * acquisition_per_point_min;
    }
    double pulses_b() const {
        return source_b.pump.pulses_per_minute() * acquisition_per_point_min;
    }
    double pulses_per_point() const { return pulses_a(); }
};

// Arm efficiencies recovered from published trigger / coincidence rates.
struct ArmEfficiencies {
    double signal_arm = 0.0;  // eta_s: trigger_rate / (rep * mu)
    double idler_arm = 0.0;   // eta_i: coincidence_rate / trigger_rate
};

inline ArmEfficiencies calibrate_efficiencies(double trigger_khz,
                                              double coincidence_khz,
                                              double repetition_mhz, double mu) {
    if (trigger_khz <= 0.0)
        throw CalibrationError("calibrate_efficiencies: zero or negative trigger rate");
    if (coincidence_khz < 0.0 || repetition_mhz <= 0.0 || mu <= 0.0)
        throw CalibrationError("calibrate_efficiencies: rates must be positive");
    ArmEfficiencies eff;
    eff.signal_arm = trigger_khz * 1e3 / (repetition_mhz * 1e6 * mu);
    eff.idler_arm = coincidence_khz / trigger_khz;
    if (eff.signal_arm > 1.0 || eff.idler_arm > 1.0)
        throw CalibrationError("calibrate_efficiencies: rates imply efficiency > 1");
    return eff;
}

namespace detail {

// Everything the per-pulse event model needs, precomputed.
struct PulseModel {
    double mu_a = 0.0, mu_b = 0.0;        // pairs per pulse
    double noise_a = 0.0, noise_b = 0.0;  // idler-band noise photons per pulse
    double eta_sa = 0.0, eta_sb = 0.0;    // heralding arms
    double dark_sa = 0.0, dark_sb = 0.0;
    double g_a = 0.0, g_b = 0.0;          // post-splitter chains (2 * eta_i)
    double dark_1 = 0.0, dark_2 = 0.0;    // per open gate, outputs 1 and 2
    double reflectivity = 0.5;
    bool idler_a_open = true;  // arm blocks for background runs
    bool idler_b_open = true;

    // Per-port detection probabilities for classically routed photons.
    double x_a1() const { return reflectivity * g_a; }
    double x_a2() const { return (1.0 - reflectivity) * g_a; }
    double x_b1() const { return (1.0 - reflectivity) * g_b; }
    double x_b2() const { return reflectivity * g_b; }
};

inline PulseModel make_pulse_model(const ExperimentConfig& cfg) {
    PulseModel m;
    m.mu_a = cfg.source_a.pairs_per_pulse;
    m.mu_b = cfg.source_b.pairs_per_pulse;
    m.noise_a = cfg.source_a.noise_photons_per_pulse;
    m.noise_b = cfg.source_b.noise_photons_per_pulse;
    m.eta_sa = cfg.det_signal_a.efficiency;
    m.eta_sb = cfg.det_signal_b.efficiency;
    m.dark_sa = cfg.det_signal_a.dark_prob_per_gate;
    m.dark_sb = cfg.det_signal_b.dark_prob_per_gate;
    m.g_a = 2.0 * cfg.det_idler_a.efficiency;
    m.g_b = 2.0 * cfg.det_idler_b.efficiency;
    m.dark_1 = cfg.det_idler_a.dark_prob_per_gate;
    m.dark_2 = cfg.det_idler_b.dark_prob_per_gate;
    m.reflectivity = cfg.splitter_reflectivity;
    if (m.g_a > 1.0 || m.g_b > 1.0)
        throw CalibrationError("idler efficiency implies post-splitter chain > 1");
    return m;
}

// Quantum two-photon splitter outcomes for the one-pair-per-source term.
// split: photons leave through opposite outputs; bunch: both through one.
// The split probability is R^2 + (1-R)^2 - 2R(1-R)*overlap; the coherent
// suppression is distributed over the two which-way arrangements in
// proportion to their classical weights (exact at R = 1/2).
struct QuantumOutcomes {
    double arr_a1b2 = 0.0;
    double arr_a2b1 = 0.0;
    double bunch_1 = 0.0;
    double bunch_2 = 0.0;
};

inline QuantumOutcomes splitter_outcomes(double reflectivity, double mandel_overlap) {
    const double r = reflectivity;
    const double classical_split = r * r + (1.0 - r) * (1.0 - r);
    const double split = classical_split - 2.0 * r * (1.0 - r) * mandel_overlap;
    const double scale = split / classical_split;
    QuantumOutcomes q;
    q.arr_a1b2 = r * r * scale;
    q.arr_a2b1 = (1.0 - r) * (1.0 - r) * scale;
    q.bunch_1 = r * (1.0 - r) * (1.0 + mandel_overlap);
    q.bunch_2 = q.bunch_1;
    return q;
}

// Truncation orders for the Poisson sums; residual mass is O(mu^5) ~ 1e-9
// of the four-fold rate at mu = 0.05.
inline constexpr int kMaxPairs = 4;
inline constexpr int kMaxNoise = 3;

inline double poisson_pmf(int k, double mean) {
    if (mean <= 0.0) return k == 0 ? 1.0 : 0.0;
    double p = std::exp(-mean);
    for (int j = 1; j <= k; ++j) p *= mean / j;
    return p;
}

inline double herald_prob(int n_pairs, double eta_s, double dark) {
    return 1.0 - std::pow(1.0 - eta_s, n_pairs) * (1.0 - dark);
}

// P(both outputs fire) for one pulse class. Classical photons (multi-pair
// surplus and noise) route independently; the genuine one-one pair, when
// present with both idler arms open, follows the quantum outcome table.
inline double both_outputs_fire(const PulseModel& m, int genuine_a, int genuine_b,
                                int noise_a, int noise_b, double mandel_overlap) {
    const bool quantum = genuine_a == 1 && genuine_b == 1 && m.idler_a_open &&
                         m.idler_b_open;
    const int cl_a = (m.idler_a_open ? genuine_a + noise_a : 0) - (quantum ? 1 : 0);
    const int cl_b = (m.idler_b_open ? genuine_b + noise_b : 0) - (quantum ? 1 : 0);

    // No-detection products over the classically routed photons.
    const double q1 = std::pow(1.0 - m.x_a1(), cl_a) * std::pow(1.0 - m.x_b1(), cl_b);
    const double q2 = std::pow(1.0 - m.x_a2(), cl_a) * std::pow(1.0 - m.x_b2(), cl_b);
    const double q12 = std::pow(1.0 - m.x_a1() - m.x_a2(), cl_a) *
                       std::pow(1.0 - m.x_b1() - m.x_b2(), cl_b);

    double miss1 = 1.0, miss2 = 1.0, miss12 = 1.0;
    if (quantum) {
        const QuantumOutcomes q = splitter_outcomes(m.reflectivity, mandel_overlap);
        const double pass_a = 1.0 - m.g_a;
        const double pass_b = 1.0 - m.g_b;
        miss1 = q.arr_a1b2 * pass_a + q.arr_a2b1 * pass_b +
                q.bunch_1 * pass_a * pass_b + q.bunch_2;
        miss2 = q.arr_a1b2 * pass_b + q.arr_a2b1 * pass_a + q.bunch_1 +
                q.bunch_2 * pass_a * pass_b;
        miss12 = (q.arr_a1b2 + q.arr_a2b1 + q.bunch_1 + q.bunch_2) * pass_a * pass_b;
    }

    const double no1 = (1.0 - m.dark_1) * q1 * miss1;
    const double no2 = (1.0 - m.dark_2) * q2 * miss2;
    const double no12 = (1.0 - m.dark_1) * (1.0 - m.dark_2) * q12 * miss12;
    return 1.0 - no1 - no2 + no12;
}

}  // namespace detail

// Per-pulse probability of a four-fold coincidence (both heralds and both
// splitter outputs) at the given Mandel overlap, aggregated analytically
// over the photon-number distributions.
inline double fourfold_probability(const ExperimentConfig& cfg, double mandel_overlap,
                                   bool idler_a_open = true, bool idler_b_open = true) {
    if (mandel_overlap < 0.0 || mandel_overlap > 1.0)
        throw InvalidInputError("fourfold_probability: overlap outside [0, 1]");
    detail::PulseModel m = detail::make_pulse_model(cfg);
    m.idler_a_open = idler_a_open;
    m.idler_b_open = idler_b_open;

    double p4 = 0.0;
    for (int na = 0; na <= detail::kMaxPairs; ++na) {
        const double wa = detail::poisson_pmf(na, m.mu_a);
        const double ha = detail::herald_prob(na, m.eta_sa, m.dark_sa);
        if (wa * ha == 0.0) continue;
        for (int nb = 0; nb <= detail::kMaxPairs; ++nb) {
            const double wb = detail::poisson_pmf(nb, m.mu_b);
            const double hb = detail::herald_prob(nb, m.eta_sb, m.dark_sb);
            if (wb * hb == 0.0) continue;
            for (int ma = 0; ma <= detail::kMaxNoise; ++ma) {
                const double wma = detail::poisson_pmf(ma, m.noise_a);
                if (wma == 0.0) continue;
                for (int mb = 0; mb <= detail::kMaxNoise; ++mb) {
                    const double wmb = detail::poisson_pmf(mb, m.noise_b);
                    if (wmb == 0.0) continue;
                    const double pd = detail::both_outputs_fire(m, na, nb, ma, mb,
                                                                mandel_overlap);
                    p4 += wa * wb * wma * wmb * ha * hb * pd;
                }
            }
        }
    }
    return p4;
}

// Raw four-fold count for one scan point: Poisson draw around the
// aggregated per-pulse probability times the pulse count.
inline long simulate_point(const ExperimentConfig& cfg, double mandel_overlap,
                           Rng& rng) {
    const double mean = fourfold_probability(cfg, mandel_overlap) *
                        cfg.pulses_per_point();
    return poisson_sample(rng, mean);
}

// Brute-force per-pulse sampler over `pulses` pump pulses; same event model
// as the aggregated path, kept for cross-validation at small scale.
inline long simulate_point_per_pulse(const ExperimentConfig& cfg, double mandel_overlap,
                                     long pulses, Rng& rng) {
    if (mandel_overlap < 0.0 || mandel_overlap > 1.0)
        throw InvalidInputError("simulate_point_per_pulse: overlap outside [0, 1]");
    const detail::PulseModel m = detail::make_pulse_model(cfg);
    const detail::QuantumOutcomes q =
        detail::splitter_outcomes(m.reflectivity, mandel_overlap);

    long fourfolds = 0;
    for (long p = 0; p < pulses; ++p) {
        const long na = poisson_sample(rng, m.mu_a);
        const long nb = poisson_sample(rng, m.mu_b);
        const long ma = poisson_sample(rng, m.noise_a);
        const long mb = poisson_sample(rng, m.noise_b);

        const bool herald_a =
            rng.next_double() < detail::herald_prob(static_cast<int>(na), m.eta_sa, m.dark_sa);
        const bool herald_b =
            rng.next_double() < detail::herald_prob(static_cast<int>(nb), m.eta_sb, m.dark_sb);
        if (!herald_a || !herald_b) continue;

        bool d1 = rng.next_double() < m.dark_1;
        bool d2 = rng.next_double() < m.dark_2;

        long classical_a = na + ma;
        long classical_b = nb + mb;
        if (na == 1 && nb == 1) {
            // One genuine idler from each source: quantum routing.
            classical_a -= 1;
            classical_b -= 1;
            const double u = rng.next_double();
            if (u < q.arr_a1b2) {
                d1 = d1 || rng.next_double() < m.g_a;
                d2 = d2 || rng.next_double() < m.g_b;
            } else if (u < q.arr_a1b2 + q.arr_a2b1) {
                d1 = d1 || rng.next_double() < m.g_b;
                d2 = d2 || rng.next_double() < m.g_a;
            } else if (u < q.arr_a1b2 + q.arr_a2b1 + q.bunch_1) {
                d1 = d1 || rng.next_double() < m.g_a;
                d1 = d1 || rng.next_double() < m.g_b;
            } else {
                d2 = d2 || rng.next_double() < m.g_a;
                d2 = d2 || rng.next_double() < m.g_b;
            }
        }
        for (long k = 0; k < classical_a; ++k) {
            if (rng.next_double() < m.reflectivity)
                d1 = d1 || rng.next_double() < m.g_a;
            else
                d2 = d2 || rng.next_double() < m.g_a;
        }
        for (long k = 0; k < classical_b; ++k) {
            if (rng.next_double() < 1.0 - m.reflectivity)
                d1 = d1 || rng.next_double() < m.g_b;
            else
                d2 = d2 || rng.next_double() < m.g_b;
        }
        if (d1 && d2) ++fourfolds;
    }
    return fourfolds;
}

enum class SourceSide { kA, kB };

// Accidental four-fold rate with one idler arm blocked, in counts/min.
// Blocking side X measures the background *attributed to the other source*;
// the published procedure sums the two.
inline double blocked_arm_rate_per_min(const ExperimentConfig& cfg,
                                       SourceSide blocked) {
    const double p4 = fourfold_probability(cfg, 0.0, blocked != SourceSide::kA,
                                           blocked != SourceSide::kB);
    return p4 * cfg.source_a.pump.pulses_per_minute();
}

// Combined two-source accidental background rate (counts/min), the quantity
// subtracted point-by-point after scaling with the acquisition time.
inline double measure_background(const ExperimentConfig& cfg) {
    return blocked_arm_rate_per_min(cfg, SourceSide::kA) +
           blocked_arm_rate_per_min(cfg, SourceSide::kB);
}

struct NetCounts {
    double net = 0.0;
    double error = 0.0;
};

// net = raw - background with a sqrt(raw) Poisson error; the background's
// own uncertainty is neglected and negative nets are preserved.
inline NetCounts subtract_background(double raw, double background) {
    if (raw < 0.0 || background < 0.0)
        throw InvalidInputError("subtract_background: counts must be >= 0");
    return NetCounts{raw - background, std::sqrt(raw)};
}

struct CarResult {
    double value = 0.0;
    bool lower_bound = false;  // no accidentals observed; value is C0 / 1
    long zero_delay_counts = 0;
    long accidental_counts = 0;
};

namespace detail {

struct TwofoldRates {
    double zero_delay = 0.0;   // per pulse
    double accidental = 0.0;   // per pulse, +-1 pulse offset
    double herald = 0.0;       // per pulse
};

inline TwofoldRates twofold_rates(const ExperimentConfig& cfg, SourceSide side) {
    const SourceSpec& src = side == SourceSide::kA ? cfg.source_a : cfg.source_b;
    const DetectorSpec& sig = side == SourceSide::kA ? cfg.det_signal_a : cfg.det_signal_b;
    const DetectorSpec& idl = side == SourceSide::kA ? cfg.det_idler_a : cfg.det_idler_b;
    const double mu = src.pairs_per_pulse;
    const double noise_miss = std::exp(-src.noise_photons_per_pulse * idl.efficiency);

    TwofoldRates r;
    double herald_mean = 0.0;
    for (int n = 0; n <= kMaxPairs; ++n) {
        const double w = poisson_pmf(n, mu);
        const double h = herald_prob(n, sig.efficiency, sig.dark_prob_per_gate);
        const double idler_fire =
            1.0 - std::pow(1.0 - idl.efficiency, n) * noise_miss *
                      (1.0 - idl.dark_prob_per_gate);
        r.zero_delay += w * h * idler_fire;
        herald_mean += w * h;
    }
    const double idler_fire_indep =
        1.0 - std::exp(-mu * idl.efficiency) * noise_miss * (1.0 - idl.dark_prob_per_gate);
    r.accidental = herald_mean * idler_fire_indep;
    r.herald = herald_mean;
    return r;
}

}  // namespace detail

// Coincidence-to-accidental ratio of one source over the full acquisition:
// two-fold coincidences at zero pulse offset over coincidences at +-1 pulse
// offset. With no accidental counts the ratio is undefined and the result
// reports a lower bound instead.
inline CarResult car(const ExperimentConfig& cfg, SourceSide side, Rng& rng) {
    const detail::TwofoldRates rates = detail::twofold_rates(cfg, side);
    const double pulses = cfg.pulses_per_point();
    CarResult result;
    result.zero_delay_counts = poisson_sample(rng, rates.zero_delay * pulses);
    result.accidental_counts = poisson_sample(rng, rates.accidental * pulses);
    if (result.accidental_counts == 0) {
        result.lower_bound = true;
        result.value = static_cast<double>(result.zero_delay_counts);
    } else {
        result.value = static_cast<double>(result.zero_delay_counts) /
                       static_cast<double>(result.accidental_counts);
    }
    return result;
}

struct DelayTally {
    double delay_ps = 0.0;
    long raw = 0;
    double background = 0.0;
    double net = 0.0;
    double error = 0.0;
};

struct SourceTally {
    double trigger_rate_khz = 0.0;
    double twofold_rate_khz = 0.0;
    CarResult car;
};

struct TallyResult {
    std::vector<DelayTally> points;
    SourceTally source_a, source_b;
    double background_rate_per_min = 0.0;
};

namespace detail {

inline SourceTally tally_source(const ExperimentConfig& cfg, SourceSide side,
                                Rng& rng) {
    const TwofoldRates rates = twofold_rates(cfg, side);
    const double per_second = cfg.source_a.pump.repetition_rate_mhz * 1e6;
    SourceTally tally;
    tally.trigger_rate_khz = rates.herald * per_second * 1e-3;
    tally.twofold_rate_khz = rates.zero_delay * per_second * 1e-3;
    tally.car = car(cfg, side, rng);
    return tally;
}

}  // namespace detail

// Full delay scan. `mandel_overlaps` holds the interference overlap at each
// configured delay (supplied by the interference module). Each scan point
// draws from its own deterministic substream, so the result is independent
// of evaluation order.
inline TallyResult run_experiment(const ExperimentConfig& cfg,
                                  const std::vector<double>& mandel_overlaps) {
    cfg.validate();
    if (mandel_overlaps.size() != cfg.delays_ps.size())
        throw InvalidInputError("run_experiment: one overlap per delay required");

    const double bg_rate = measure_background(cfg);
    const double bg_per_point = bg_rate * cfg.acquisition_per_point_min;

    TallyResult result;
    result.background_rate_per_min = bg_rate;
    result.points.resize(cfg.delays_ps.size());
    for (std::size_t k = 0; k < cfg.delays_ps.size(); ++k) {
        Rng rng = Rng::substream(cfg.rng_seed, k);
        DelayTally& point = result.points[k];
        point.delay_ps = cfg.delays_ps[k];
        point.raw = simulate_point(cfg, mandel_overlaps[k], rng);
        point.background = bg_per_point;
        const NetCounts net = subtract_background(static_cast<double>(point.raw),
                                                  bg_per_point);
        point.net = net.net;
        point.error = net.error;
    }
    Rng rng_a = Rng::substream(cfg.rng_seed, 1000003);
    Rng rng_b = Rng::substream(cfg.rng_seed, 1000033);
    result.source_a = detail::tally_source(cfg, SourceSide::kA, rng_a);
    result.source_b = detail::tally_source(cfg, SourceSide::kB, rng_b);
    return result;
}

}  // namespace homsim
