#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tdp/error.hpp"

namespace tdp {

/// How the components of a multi-valued grid field are interleaved in memory.
///
/// AoS stores all components of a site together, SoA stores each component as
/// its own contiguous array, and AoSoA stores runs of `sal` sites per
/// component before moving to the next component. AoS and SoA are the
/// `sal = 1` and `sal = nsites_padded` limits of AoSoA.
class LayoutScheme {
public:
    enum class Kind { aos, soa, aosoa };

    static LayoutScheme aos() { return LayoutScheme{Kind::aos, 1}; }
    static LayoutScheme soa() { return LayoutScheme{Kind::soa, 0}; }
    static LayoutScheme aosoa(std::size_t sal);

    /// Parses `aos`, `soa` or `aosoa:<sal>` (lowercase, decimal sal >= 1).
    static LayoutScheme parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    /// Requested short-array length; only meaningful for AoSoA.
    std::size_t sal() const noexcept { return sal_; }

    std::string to_string() const;

    friend bool operator==(const LayoutScheme&, const LayoutScheme&) = default;

private:
    LayoutScheme(Kind k, std::size_t sal) : kind_(k), sal_(sal) {}

    Kind kind_;
    std::size_t sal_;
};

/// Resolved, immutable description of one field's storage.
class LayoutDescriptor {
public:
    std::size_t nsites_logical() const noexcept { return nsites_logical_; }
    std::size_t nsites_padded() const noexcept { return nsites_padded_; }
    std::size_t ncomponents() const noexcept { return ncomponents_; }
    std::size_t sal() const noexcept { return sal_; }
    std::size_t total() const noexcept { return nsites_padded_ * ncomponents_; }
    const LayoutScheme& scheme() const noexcept { return scheme_; }

    /// Flat offset of (comp, site). Unchecked; see `index()` for the checked
    /// form.
    std::size_t operator()(std::size_t comp, std::size_t site) const noexcept {
        const std::size_t block = site / sal_;
        return block * ncomponents_ * sal_ + comp * sal_ + (site - block * sal_);
    }

    friend bool operator==(const LayoutDescriptor&, const LayoutDescriptor&) = default;

private:
    friend LayoutDescriptor make_layout(std::size_t, std::size_t, const LayoutScheme&,
                                        std::size_t);
    LayoutDescriptor(std::size_t logical, std::size_t padded, std::size_t ncomp,
                     std::size_t sal, LayoutScheme scheme)
        : nsites_logical_(logical), nsites_padded_(padded), ncomponents_(ncomp), sal_(sal),
          scheme_(scheme) {}

    std::size_t nsites_logical_;
    std::size_t nsites_padded_;
    std::size_t ncomponents_;
    std::size_t sal_;
    LayoutScheme scheme_;
};

/// Builds a descriptor whose padded site count is the smallest multiple of
/// lcm(sal, vvl) covering `nsites`. For SoA the padding quantum is `vvl` and
/// the short-array length then becomes the padded count.
LayoutDescriptor make_layout(std::size_t nsites, std::size_t ncomponents,
                             const LayoutScheme& scheme, std::size_t vvl);

/// Checked flat offset; throws BoundsError for comp/site outside the
/// descriptor.
std::size_t index(const LayoutDescriptor& layout, std::size_t comp, std::size_t site);

/// Multi-dimensional lattice extents. Sites are numbered row-major with
/// dimension 0 fastest, so in 2-D site = y * nx + x.
class GridShape {
public:
    explicit GridShape(std::vector<std::size_t> dims);

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t extent(std::size_t d) const { return dims_.at(d); }
    std::size_t nsites() const noexcept { return nsites_; }

    std::size_t site_of(const std::vector<std::size_t>& coords) const;
    std::vector<std::size_t> coords_of(std::size_t site) const;

    friend bool operator==(const GridShape&, const GridShape&) = default;

private:
    std::vector<std::size_t> dims_;
    std::size_t nsites_ = 1;
};

}  // namespace tdp
