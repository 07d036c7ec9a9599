#include "tdp/memspace.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <new>
#include <unordered_set>

namespace tdp {

namespace {

constexpr std::size_t kAlignment = 64;
constexpr std::uint64_t kPoisonBits = 0x7ff4dead0000beefULL;  // sNaN, quiet bit clear

}  // namespace

std::size_t element_size(ElementType type) noexcept {
    switch (type) {
        case ElementType::f64: return 8;
        case ElementType::i32: return 4;
        case ElementType::i64: return 8;
    }
    return 0;
}

std::string_view to_string(ElementType type) noexcept {
    switch (type) {
        case ElementType::f64: return "f64";
        case ElementType::i32: return "i32";
        case ElementType::i64: return "i64";
    }
    return "?";
}

double poison_value() noexcept { return std::bit_cast<double>(kPoisonBits); }

bool is_poison(double value) noexcept { return std::bit_cast<std::uint64_t>(value) == kPoisonBits; }

void TargetBuffer::AlignedDelete::operator()(std::byte* p) const noexcept {
    ::operator delete[](p, std::align_val_t{kAlignment});
}

TargetBuffer::TargetBuffer(TargetBuffer&& other) noexcept
    : storage_(std::move(other.storage_)), count_(other.count_), type_(other.type_),
      freed_(other.freed_) {
    other.count_ = 0;
}

TargetBuffer& TargetBuffer::operator=(TargetBuffer&& other) noexcept {
    if (this != &other) {
        storage_ = std::move(other.storage_);
        count_ = other.count_;
        type_ = other.type_;
        freed_ = other.freed_;
        other.count_ = 0;
    }
    return *this;
}

TargetBuffer::~TargetBuffer() = default;

ElementType TargetBuffer::type() const {
    check_access(type_);
    return type_;
}

std::size_t TargetBuffer::count() const {
    check_access(type_);
    return count_;
}

void TargetBuffer::check_access(ElementType requested) const {
    if (freed_) throw ContractViolation("target buffer used after target_free");
    if (!storage_) throw ContractViolation("target buffer handle is empty");
    if (requested != type_)
        throw InvalidArgument("target buffer holds " + std::string(to_string(type_)) +
                              ", accessed as " + std::string(to_string(requested)));
}

TargetBuffer target_malloc(std::size_t count, ElementType type) {
    if (count == 0) throw InvalidArgument("target_malloc: count must be >= 1");
    const std::size_t esize = element_size(type);
    if (count > SIZE_MAX / esize) throw ResourceError("target_malloc: size overflow");
    const std::size_t bytes = count * esize;

    auto* raw = static_cast<std::byte*>(
        ::operator new[](bytes, std::align_val_t{kAlignment}, std::nothrow));
    if (raw == nullptr)
        throw ResourceError("target_malloc: failed to allocate " + std::to_string(bytes) +
                            " bytes");

    TargetBuffer buf;
    buf.storage_.reset(raw);
    buf.count_ = count;
    buf.type_ = type;
    if (type == ElementType::f64)
        std::fill_n(reinterpret_cast<double*>(raw), count, poison_value());
    else
        std::memset(raw, 0xA5, bytes);
    return buf;
}

TargetBuffer target_calloc(std::size_t count, ElementType type) {
    TargetBuffer buf = target_malloc(count, type);
    std::memset(buf.storage_.get(), 0, buf.size_bytes());
    return buf;
}

void target_free(TargetBuffer& buffer) {
    if (buffer.freed_) throw ContractViolation("target_free: buffer already freed");
    if (!buffer.storage_) throw ContractViolation("target_free: buffer handle is empty");
    buffer.storage_.reset();
    buffer.count_ = 0;
    buffer.freed_ = true;
}

template <class T>
void copy_to_target(TargetBuffer& dst, std::span<const T> src) {
    auto out = dst.span<T>();
    if (out.size() != src.size())
        throw InvalidArgument("copy_to_target: size mismatch (" + std::to_string(src.size()) +
                              " host vs " + std::to_string(out.size()) + " target elements)");
    std::memcpy(out.data(), src.data(), src.size_bytes());
}

template <class T>
void copy_from_target(std::span<T> dst, const TargetBuffer& src) {
    auto in = src.span<T>();
    if (in.size() != dst.size())
        throw InvalidArgument("copy_from_target: size mismatch (" + std::to_string(in.size()) +
                              " target vs " + std::to_string(dst.size()) + " host elements)");
    std::memcpy(dst.data(), in.data(), in.size_bytes());
}

template void copy_to_target<double>(TargetBuffer&, std::span<const double>);
template void copy_to_target<std::int32_t>(TargetBuffer&, std::span<const std::int32_t>);
template void copy_to_target<std::int64_t>(TargetBuffer&, std::span<const std::int64_t>);
template void copy_from_target<double>(std::span<double>, const TargetBuffer&);
template void copy_from_target<std::int32_t>(std::span<std::int32_t>, const TargetBuffer&);
template void copy_from_target<std::int64_t>(std::span<std::int64_t>, const TargetBuffer&);

std::string_view to_string(Coherence c) noexcept {
    switch (c) {
        case Coherence::coherent: return "coherent";
        case Coherence::host_dirty: return "host-dirty";
        case Coherence::target_dirty: return "target-dirty";
    }
    return "?";
}

FieldPair::FieldPair(const LayoutDescriptor& layout)
    : layout_(layout), host_(layout.total(), 0.0),
      target_(target_malloc(layout.total(), ElementType::f64)) {}

std::span<double> FieldPair::host_mut() noexcept {
    coherence_ = Coherence::host_dirty;
    return host_;
}

void FieldPair::set_host(std::size_t comp, std::size_t site, double value) {
    host_[index(layout_, comp, site)] = value;
    coherence_ = Coherence::host_dirty;
}

FieldView FieldPair::target_view() {
    coherence_ = Coherence::target_dirty;
    return {target_.span<double>().data(), layout_};
}

ConstFieldView FieldPair::target_cview() const {
    return {target_.span<const double>().data(), layout_};
}

void FieldPair::copy_to_target() {
    tdp::copy_to_target<double>(target_, host_);
    coherence_ = Coherence::coherent;
}

void FieldPair::copy_from_target() {
    tdp::copy_from_target<double>(host_, target_);
    coherence_ = Coherence::coherent;
}

void FieldPair::check_subset(std::span<const std::size_t> sites) const {
    std::unordered_set<std::size_t> seen;
    seen.reserve(sites.size());
    for (std::size_t s : sites) {
        if (s >= layout_.nsites_logical())
            throw BoundsError("subset copy: site " + std::to_string(s) + " >= " +
                              std::to_string(layout_.nsites_logical()));
        if (!seen.insert(s).second)
            throw InvalidArgument("subset copy: duplicate site " + std::to_string(s));
    }
}

void FieldPair::copy_subset_to_target(std::span<const std::size_t> sites) {
    check_subset(sites);
    auto out = target_.span<double>();
    for (std::size_t s : sites)
        for (std::size_t c = 0; c < layout_.ncomponents(); ++c) {
            const std::size_t i = layout_(c, s);
            out[i] = host_[i];
        }
}

void FieldPair::copy_subset_from_target(std::span<const std::size_t> sites) {
    check_subset(sites);
    auto in = target_.span<const double>();
    for (std::size_t s : sites)
        for (std::size_t c = 0; c < layout_.ncomponents(); ++c) {
            const std::size_t i = layout_(c, s);
            host_[i] = in[i];
        }
}

std::vector<double> FieldPair::logical_host_values() const {
    const std::size_t nc = layout_.ncomponents();
    std::vector<double> out(layout_.nsites_logical() * nc);
    for (std::size_t s = 0; s < layout_.nsites_logical(); ++s)
        for (std::size_t c = 0; c < nc; ++c) out[s * nc + c] = host_[layout_(c, s)];
    return out;
}

void FieldPair::load_logical(std::span<const double> canonical) {
    const std::size_t nc = layout_.ncomponents();
    if (canonical.size() != layout_.nsites_logical() * nc)
        throw InvalidArgument("load_logical: expected " +
                              std::to_string(layout_.nsites_logical() * nc) + " values, got " +
                              std::to_string(canonical.size()));
    for (std::size_t s = 0; s < layout_.nsites_logical(); ++s)
        for (std::size_t c = 0; c < nc; ++c) host_[layout_(c, s)] = canonical[s * nc + c];
    coherence_ = Coherence::host_dirty;
}

void FieldPair::poison_padding(double sentinel) {
    auto tgt = target_.span<double>();
    for (std::size_t s = layout_.nsites_logical(); s < layout_.nsites_padded(); ++s)
        for (std::size_t c = 0; c < layout_.ncomponents(); ++c) {
            const std::size_t i = layout_(c, s);
            host_[i] = sentinel;
            tgt[i] = sentinel;
        }
}

void copy_to_target(FieldPair& pair) { pair.copy_to_target(); }
void copy_from_target(FieldPair& pair) { pair.copy_from_target(); }
void copy_subset_to_target(FieldPair& pair, std::span<const std::size_t> sites) {
    pair.copy_subset_to_target(sites);
}
void copy_subset_from_target(FieldPair& pair, std::span<const std::size_t> sites) {
    pair.copy_subset_from_target(sites);
}

void ConstantTable::set(std::string_view name, double value) {
    if (in_flight())
        throw ContractViolation("constant '" + std::string(name) +
                                "' written while a launch is in flight");
    auto it = values_.find(name);
    if (it == values_.end())
        values_.emplace(std::string(name), value);
    else
        it->second = value;
}

double ConstantTable::get(std::string_view name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw InvalidArgument("unknown constant '" + std::string(name) + "'");
    return it->second;
}

bool ConstantTable::contains(std::string_view name) const { return values_.contains(name); }

void copy_const_to_target(ConstantTable& table, std::string_view name, double value) {
    table.set(name, value);
}

}  // namespace tdp
