#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <vector>

#include <fftw3.h>

namespace xpcs {

/// std::allocator replacement that hands out fftw_malloc'd (SIMD-aligned) memory,
/// so vectors can be passed directly to the new-array execute functions.
template <typename T>
struct FftwAllocator
{
    using value_type = T;

    FftwAllocator() = default;
    template <typename U>
    FftwAllocator(FftwAllocator<U> const&) noexcept {}

    T* allocate(std::size_t n)
    {
        void* p = fftw_malloc(n * sizeof(T));
        if (!p && n) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

    template <typename U>
    bool operator==(FftwAllocator<U> const&) const noexcept { return true; }
};

using RealBuffer = std::vector<double, FftwAllocator<double>>;
using ComplexBuffer = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

enum class FftPlanning { Estimate, Measure };

/// Forward real-to-complex 3D transform of an n^3 grid stored x-fastest.
/// Output is the half spectrum: n (z) x n (y) x (n/2+1) (x), unnormalized,
/// with the e^{-i q.r} sign convention.
class ForwardFft3d
{
public:
    explicit ForwardFft3d(std::size_t n, FftPlanning planning = FftPlanning::Estimate);
    ~ForwardFft3d();
    ForwardFft3d(ForwardFft3d const&) = delete;
    ForwardFft3d& operator=(ForwardFft3d const&) = delete;

    std::size_t size() const { return n_; }
    std::size_t half_size() const { return n_ * n_ * (n_ / 2 + 1); }

    /// in.size() == n^3, out resized to half_size(). Thread-safe for distinct buffers.
    void execute(RealBuffer const& in, ComplexBuffer& out) const;

private:
    std::size_t n_;
    fftw_plan plan_ = nullptr;
};

} // namespace xpcs
