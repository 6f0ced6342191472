// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/bytes.hpp"

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace httpsrr
{
  /// A fully-qualified domain name held as lowercase labels. The empty label
  /// list is the root ".". Comparison is therefore case-insensitive by
  /// construction.
  class DomainName
  {
  public:
    static constexpr std::size_t max_label = 63;
    static constexpr std::size_t max_wire = 255;

    DomainName() = default;

    /// Presentation form; `\DDD` and `\X` escapes honoured. A missing
    /// trailing dot is treated as absolute.
    static DomainName parse(std::string_view text);
    static DomainName from_labels(std::vector<std::string> labels);
    /// Uncompressed wire form.
    static DomainName from_wire(ByteReader& in);

    const std::vector<std::string>& labels() const noexcept
    {
      return labels_;
    }
    bool is_root() const noexcept
    {
      return labels_.empty();
    }

    std::string to_string() const;
    void to_wire(ByteWriter& out) const;
    std::size_t wire_length() const noexcept;

    /// True when this name equals `other` or sits beneath it.
    bool is_subdomain_of(const DomainName& other) const noexcept;
    bool ends_with(std::string_view suffix_text) const;

    /// Drop the leftmost label; root stays root.
    DomainName parent() const;
    /// `prefix` + this, e.g. "www" + a.com. -> www.a.com.
    DomainName prepend(std::string_view label) const;

    auto operator<=>(const DomainName&) const = default;
    bool operator==(const DomainName&) const = default;

  private:
    explicit DomainName(std::vector<std::string> labels) :
      labels_(std::move(labels))
    {}

    std::vector<std::string> labels_;
  };
}
