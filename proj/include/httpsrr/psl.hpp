// Copyright (c) httpsrr contributors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "httpsrr/name.hpp"

#include <optional>

namespace httpsrr
{
  /// Public suffix under the embedded ICANN rules (wildcards and exceptions
  /// honoured, unlisted TLDs treated as suffixes). Labels are compared
  /// case-insensitively; IDNs must already be in A-label form.
  DomainName public_suffix(const DomainName& name);

  /// Suffix plus one label; nullopt when `name` is itself a public suffix.
  std::optional<DomainName> registrable_domain(const DomainName& name);
}
