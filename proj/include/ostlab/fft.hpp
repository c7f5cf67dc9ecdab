#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "ostlab/errors.hpp"

namespace ostlab::fft {

using cplx = std::complex<double>;

namespace detail {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

enum class Kind { c2c_forward, c2c_backward, r2c, c2r };

// Planning is not thread-safe in FFTW; execution with the new-array interface is.
// Plans are created once per (kind, n) with FFTW_ESTIMATE, which is deterministic.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(Kind kind, std::size_t n) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(kind, n);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second.get();
        Plan plan = make(kind, n);
        if (!plan) throw ResolutionError("fftw planner failed");
        fftw_plan raw = plan.get();
        plans_.emplace(key, std::move(plan));
        return raw;
    }

private:
    PlanCache() = default;

    static Plan make(Kind kind, std::size_t n) {
        const int len = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        auto* cin = fftw_alloc_complex(n);
        auto* cout = fftw_alloc_complex(n);
        auto* rin = fftw_alloc_real(n);
        fftw_plan p = nullptr;
        switch (kind) {
        case Kind::c2c_forward: p = fftw_plan_dft_1d(len, cin, cout, FFTW_FORWARD, flags); break;
        case Kind::c2c_backward: p = fftw_plan_dft_1d(len, cin, cout, FFTW_BACKWARD, flags); break;
        case Kind::r2c: p = fftw_plan_dft_r2c_1d(len, rin, cout, flags); break;
        case Kind::c2r: p = fftw_plan_dft_c2r_1d(len, cin, rin, flags); break;
        }
        fftw_free(cin);
        fftw_free(cout);
        fftw_free(rin);
        return Plan(p);
    }

    std::mutex mutex_;
    std::map<std::pair<Kind, std::size_t>, Plan> plans_;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

inline void check_size(std::size_t a, std::size_t b) {
    if (a != b) throw ResolutionError("transform size mismatch");
}

}  // namespace detail

// Unnormalized transforms. Forward uses e^{-2 pi i jm/N}, backward e^{+2 pi i jm/N}.
inline void forward(std::span<const cplx> in, std::span<cplx> out) {
    detail::check_size(in.size(), out.size());
    std::vector<cplx> buf(in.begin(), in.end());
    auto plan = detail::PlanCache::instance().get(detail::Kind::c2c_forward, in.size());
    fftw_execute_dft(plan, detail::as_fftw(buf.data()), detail::as_fftw(out.data()));
}

inline void backward(std::span<const cplx> in, std::span<cplx> out) {
    detail::check_size(in.size(), out.size());
    std::vector<cplx> buf(in.begin(), in.end());
    auto plan = detail::PlanCache::instance().get(detail::Kind::c2c_backward, in.size());
    fftw_execute_dft(plan, detail::as_fftw(buf.data()), detail::as_fftw(out.data()));
}

// Real input of length n to n/2+1 half-spectrum bins.
inline void r2c(std::span<const double> in, std::span<cplx> out) {
    detail::check_size(in.size() / 2 + 1, out.size());
    std::vector<double> buf(in.begin(), in.end());
    auto plan = detail::PlanCache::instance().get(detail::Kind::r2c, in.size());
    fftw_execute_dft_r2c(plan, buf.data(), detail::as_fftw(out.data()));
}

// Half spectrum to real output of length n. The input is not modified.
inline void c2r(std::span<const cplx> in, std::span<double> out) {
    detail::check_size(out.size() / 2 + 1, in.size());
    std::vector<cplx> buf(in.begin(), in.end());
    auto plan = detail::PlanCache::instance().get(detail::Kind::c2r, out.size());
    fftw_execute_dft_c2r(plan, detail::as_fftw(buf.data()), out.data());
}

}  // namespace ostlab::fft
