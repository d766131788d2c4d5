#pragma once

#include "bolzalab/core.hpp"
#include "bolzalab/group.hpp"
#include "bolzalab/rng.hpp"

#include <optional>

namespace bolza {

/*
    Liouville probability measure on SM(Bolza): normalized hyperbolic area on
    the octagon times the uniform fiber angle.  Sampling is by rejection from
    the Euclidean-uniform proposal on the bounding disk of the octagon with
    weight 4/(1-|z|^2)^2; the envelope is the weight at the rim.
*/
class LiouvilleSampler {
  public:
    LiouvilleSampler(const SurfaceGroup& grp, uint64_t seed)
        : grp_(&grp), rng_(seed), rho_max_(std::tanh(0.5 * grp.circumradius)) {
        double w_rim = sq(1.0 - sq(rho_max_));
        envelope_inv_ = w_rim;  // acceptance = [z in F] * (w_rim / (1-|z|^2)^2)... inverted below
    }

    // base point only (normalized area measure on M)
    complexd next_base() {
        for (int tries = 0; tries < 100000; ++tries) {
            double r = rho_max_ * std::sqrt(rng_.next_double());
            double phi = rng_.uniform(0.0, two_pi);
            complexd z = std::polar(r, phi);
            double accept = envelope_inv_ / sq(1.0 - std::norm(z));
            if (rng_.next_double() < accept && in_fundamental_domain(*grp_, z)) return z;
        }
        throw IterationCap("Liouville rejection sampler starved");
    }

    PhasePoint next() {
        complexd z = next_base();
        double theta = rng_.uniform(0.0, two_pi);
        return PhasePoint{frame_from_disk(z, theta), z, theta, true};
    }

    Rng& rng() { return rng_; }

  private:
    const SurfaceGroup* grp_;
    Rng rng_;
    double rho_max_;
    double envelope_inv_;
};

inline std::vector<PhasePoint> sample_liouville(const SurfaceGroup& grp, int n, uint64_t seed) {
    if (n < 1) throw ConfigError("sample_liouville needs n >= 1");
    LiouvilleSampler s(grp, seed);
    std::vector<PhasePoint> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(s.next());
    return out;
}

/*
    Restriction of the Liouville measure to a base disk d(z, center) < radius.
    Used as exact importance sampling when the static side of a pairing is
    supported in the disk: E_mu[h] = mass * E_{mu|disk}[h] whenever h vanishes
    outside.  The mass is estimated once by the same deterministic sampler, so
    runs remain reproducible.
*/
class RestrictedSampler {
  public:
    // mass_samples = 0 skips the mass probe (for batch workers that only draw)
    RestrictedSampler(const SurfaceGroup& grp, complexd center, double radius, uint64_t seed,
                      int mass_samples = 200000)
        : inner_(grp, derive_seed(seed, 0x5eed)), center_(center), radius_(radius) {
        if (mass_samples <= 0) return;
        LiouvilleSampler probe(grp, derive_seed(seed, 0xace));
        long hits = 0;
        for (int i = 0; i < mass_samples; ++i)
            if (dist_disk(probe.next_base(), center) < radius) ++hits;
        mass_ = static_cast<double>(hits) / mass_samples;
        if (mass_ <= 0.0) throw VarianceBudget("restriction disk has no sampled mass");
    }

    PhasePoint next() {
        for (int tries = 0; tries < 1000000; ++tries) {
            PhasePoint p = inner_.next();
            if (dist_disk(p.z, center_) < radius_) return p;
        }
        throw IterationCap("restricted sampler starved");
    }

    double mass() const { return mass_; }

  private:
    LiouvilleSampler inner_;
    complexd center_;
    double radius_;
    double mass_ = 0.0;
};

}  // namespace bolza
