#include "tdp/layout.hpp"

#include <charconv>
#include <numeric>

namespace tdp {

LayoutScheme LayoutScheme::aosoa(std::size_t sal) {
    if (sal == 0) throw InvalidArgument("aosoa short-array length must be >= 1");
    return LayoutScheme{Kind::aosoa, sal};
}

LayoutScheme LayoutScheme::parse(std::string_view text) {
    if (text == "aos") return aos();
    if (text == "soa") return soa();
    constexpr std::string_view prefix = "aosoa:";
    if (text.starts_with(prefix)) {
        const std::string_view digits = text.substr(prefix.size());
        std::size_t sal = 0;
        const auto* first = digits.data();
        const auto* last = digits.data() + digits.size();
        const bool all_digits = !digits.empty() &&
                                digits.find_first_not_of("0123456789") == std::string_view::npos;
        if (all_digits) {
            auto [ptr, ec] = std::from_chars(first, last, sal);
            if (ec == std::errc{} && ptr == last && sal >= 1) return aosoa(sal);
        }
    }
    throw InvalidArgument("invalid layout '" + std::string(text) +
                          "' (expected aos, soa or aosoa:<sal>)");
}

std::string LayoutScheme::to_string() const {
    switch (kind_) {
        case Kind::aos: return "aos";
        case Kind::soa: return "soa";
        case Kind::aosoa: return "aosoa:" + std::to_string(sal_);
    }
    return {};
}

LayoutDescriptor make_layout(std::size_t nsites, std::size_t ncomponents,
                             const LayoutScheme& scheme, std::size_t vvl) {
    if (nsites == 0) throw InvalidArgument("make_layout: nsites must be >= 1");
    if (ncomponents == 0) throw InvalidArgument("make_layout: ncomponents must be >= 1");
    if (vvl == 0) throw InvalidArgument("make_layout: vvl must be >= 1");

    auto round_up = [](std::size_t n, std::size_t q) { return (n + q - 1) / q * q; };

    switch (scheme.kind()) {
        case LayoutScheme::Kind::aos: {
            const std::size_t padded = round_up(nsites, vvl);
            return {nsites, padded, ncomponents, 1, scheme};
        }
        case LayoutScheme::Kind::soa: {
            const std::size_t padded = round_up(nsites, vvl);
            return {nsites, padded, ncomponents, padded, scheme};
        }
        case LayoutScheme::Kind::aosoa: {
            const std::size_t quantum = std::lcm(scheme.sal(), vvl);
            const std::size_t padded = round_up(nsites, quantum);
            return {nsites, padded, ncomponents, scheme.sal(), scheme};
        }
    }
    throw InvalidArgument("make_layout: unknown layout scheme");
}

std::size_t index(const LayoutDescriptor& layout, std::size_t comp, std::size_t site) {
    if (comp >= layout.ncomponents())
        throw BoundsError("index: component " + std::to_string(comp) + " >= " +
                          std::to_string(layout.ncomponents()));
    if (site >= layout.nsites_padded())
        throw BoundsError("index: site " + std::to_string(site) + " >= " +
                          std::to_string(layout.nsites_padded()));
    return layout(comp, site);
}

GridShape::GridShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw InvalidArgument("GridShape: at least one dimension required");
    for (std::size_t d : dims_) {
        if (d == 0) throw InvalidArgument("GridShape: extents must be >= 1");
        nsites_ *= d;
    }
}

std::size_t GridShape::site_of(const std::vector<std::size_t>& coords) const {
    if (coords.size() != dims_.size())
        throw InvalidArgument("site_of: expected " + std::to_string(dims_.size()) +
                              " coordinates");
    std::size_t site = 0;
    for (std::size_t d = dims_.size(); d-- > 0;) {
        if (coords[d] >= dims_[d])
            throw BoundsError("site_of: coordinate " + std::to_string(coords[d]) +
                              " out of range in dimension " + std::to_string(d));
        site = site * dims_[d] + coords[d];
    }
    return site;
}

std::vector<std::size_t> GridShape::coords_of(std::size_t site) const {
    if (site >= nsites_)
        throw BoundsError("coords_of: site " + std::to_string(site) + " >= " +
                          std::to_string(nsites_));
    std::vector<std::size_t> coords(dims_.size());
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        coords[d] = site % dims_[d];
        site /= dims_[d];
    }
    return coords;
}

}  // namespace tdp
