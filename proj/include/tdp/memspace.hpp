#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "tdp/error.hpp"
#include "tdp/layout.hpp"

namespace tdp {

enum class ElementType { f64, i32, i64 };

std::size_t element_size(ElementType type) noexcept;
std::string_view to_string(ElementType type) noexcept;

template <class T>
constexpr ElementType element_type_of();
template <>
constexpr ElementType element_type_of<double>() { return ElementType::f64; }
template <>
constexpr ElementType element_type_of<std::int32_t>() { return ElementType::i32; }
template <>
constexpr ElementType element_type_of<std::int64_t>() { return ElementType::i64; }

/// Storage in the target memory space.
///
/// Host and target are always physically distinct allocations, even on a
/// shared-memory machine, so every transfer goes through an explicit copy.
/// Buffers are move-only. After `target_free` (or a move) the handle is dead
/// and every access throws ContractViolation.
class TargetBuffer {
public:
    TargetBuffer() = default;
    TargetBuffer(TargetBuffer&& other) noexcept;
    TargetBuffer& operator=(TargetBuffer&& other) noexcept;
    TargetBuffer(const TargetBuffer&) = delete;
    TargetBuffer& operator=(const TargetBuffer&) = delete;
    ~TargetBuffer();

    bool valid() const noexcept { return storage_ != nullptr; }
    bool freed() const noexcept { return freed_; }
    ElementType type() const;
    std::size_t count() const;
    std::size_t size_bytes() const { return count() * element_size(type()); }

    template <class T>
    std::span<T> span() {
        check_access(element_type_of<std::remove_cv_t<T>>());
        return {reinterpret_cast<T*>(storage_.get()), count_};
    }
    template <class T>
    std::span<const T> span() const {
        check_access(element_type_of<std::remove_cv_t<T>>());
        return {reinterpret_cast<const T*>(storage_.get()), count_};
    }

private:
    friend TargetBuffer target_malloc(std::size_t, ElementType);
    friend TargetBuffer target_calloc(std::size_t, ElementType);
    friend void target_free(TargetBuffer&);

    struct AlignedDelete {
        void operator()(std::byte* p) const noexcept;
    };

    void check_access(ElementType requested) const;

    std::unique_ptr<std::byte[], AlignedDelete> storage_;
    std::size_t count_ = 0;
    ElementType type_ = ElementType::f64;
    bool freed_ = false;
};

/// Uninitialized target storage. Contents are unspecified; doubles are in
/// practice filled with a signaling-NaN pattern so stray reads surface.
TargetBuffer target_malloc(std::size_t count, ElementType type);
/// Target storage with every element zero.
TargetBuffer target_calloc(std::size_t count, ElementType type);
/// Releases the storage. Freeing a dead handle throws ContractViolation.
void target_free(TargetBuffer& buffer);

/// Bitwise signaling NaN used to poison uninitialized and padding storage.
double poison_value() noexcept;
bool is_poison(double value) noexcept;

template <class T>
void copy_to_target(TargetBuffer& dst, std::span<const T> src);
template <class T>
void copy_from_target(std::span<T> dst, const TargetBuffer& src);

extern template void copy_to_target<double>(TargetBuffer&, std::span<const double>);
extern template void copy_to_target<std::int32_t>(TargetBuffer&, std::span<const std::int32_t>);
extern template void copy_to_target<std::int64_t>(TargetBuffer&, std::span<const std::int64_t>);
extern template void copy_from_target<double>(std::span<double>, const TargetBuffer&);
extern template void copy_from_target<std::int32_t>(std::span<std::int32_t>, const TargetBuffer&);
extern template void copy_from_target<std::int64_t>(std::span<std::int64_t>, const TargetBuffer&);

/// Kernel-side view of a laid-out field: flat storage plus its index map.
template <class T>
class BasicFieldView {
public:
    BasicFieldView(T* data, const LayoutDescriptor& layout)
        : data_(data), layout_(&layout), ncomp_(layout.ncomponents()), sal_(layout.sal()) {}

    T& operator()(std::size_t comp, std::size_t site) const noexcept {
        const std::size_t block = site / sal_;
        return data_[block * ncomp_ * sal_ + comp * sal_ + (site - block * sal_)];
    }
    T* data() const noexcept { return data_; }
    const LayoutDescriptor& layout() const noexcept { return *layout_; }

private:
    T* data_;
    const LayoutDescriptor* layout_;
    std::size_t ncomp_;
    std::size_t sal_;
};

using FieldView = BasicFieldView<double>;
using ConstFieldView = BasicFieldView<const double>;

enum class Coherence { coherent, host_dirty, target_dirty };
std::string_view to_string(Coherence c) noexcept;

/// Host and target copies of one multi-valued double field sharing a layout.
///
/// The coherence flag moves to host_dirty on mutable host access, to
/// target_dirty on mutable target access (kernel launch), and back to
/// coherent on a whole-field copy in either direction.
class FieldPair {
public:
    explicit FieldPair(const LayoutDescriptor& layout);

    const LayoutDescriptor& layout() const noexcept { return layout_; }
    Coherence coherence() const noexcept { return coherence_; }

    std::span<const double> host() const noexcept { return host_; }
    std::span<double> host_mut() noexcept;
    double host_at(std::size_t comp, std::size_t site) const {
        return host_[index(layout_, comp, site)];
    }
    void set_host(std::size_t comp, std::size_t site, double value);

    const TargetBuffer& target() const noexcept { return target_; }

    /// Writable kernel view; marks the target copy as newer than the host.
    FieldView target_view();
    ConstFieldView target_cview() const;

    void copy_to_target();
    void copy_from_target();
    void copy_subset_to_target(std::span<const std::size_t> sites);
    void copy_subset_from_target(std::span<const std::size_t> sites);

    /// Logical values in canonical (site-major, component-minor) order read
    /// from the host copy, independent of layout.
    std::vector<double> logical_host_values() const;
    /// Loads canonical-order values into the host copy.
    void load_logical(std::span<const double> canonical);

    /// Overwrites every padded site, host and target, with `sentinel`.
    void poison_padding(double sentinel);

private:
    void check_subset(std::span<const std::size_t> sites) const;

    LayoutDescriptor layout_;
    std::vector<double> host_;
    TargetBuffer target_;
    Coherence coherence_ = Coherence::host_dirty;
};

void copy_to_target(FieldPair& pair);
void copy_from_target(FieldPair& pair);
void copy_subset_to_target(FieldPair& pair, std::span<const std::size_t> sites);
void copy_subset_from_target(FieldPair& pair, std::span<const std::size_t> sites);

/// Named double-precision constants that kernels read but never write.
class ConstantTable {
public:
    ConstantTable() = default;
    ConstantTable(const ConstantTable&) = delete;
    ConstantTable& operator=(const ConstantTable&) = delete;

    /// Throws ContractViolation while a launch is in flight.
    void set(std::string_view name, double value);
    /// Throws InvalidArgument for unknown names.
    double get(std::string_view name) const;
    bool contains(std::string_view name) const;

    bool in_flight() const noexcept { return inflight_.load() > 0; }

    /// RAII marker held by the launch engine for the duration of a launch.
    class LaunchGuard {
    public:
        explicit LaunchGuard(const ConstantTable& table) : table_(table) { ++table_.inflight_; }
        ~LaunchGuard() { --table_.inflight_; }
        LaunchGuard(const LaunchGuard&) = delete;
        LaunchGuard& operator=(const LaunchGuard&) = delete;

    private:
        const ConstantTable& table_;
    };

private:
    std::map<std::string, double, std::less<>> values_;
    mutable std::atomic<int> inflight_{0};
};

void copy_const_to_target(ConstantTable& table, std::string_view name, double value);

}  // namespace tdp
