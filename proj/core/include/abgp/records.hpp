#pragma once

#include "abgp/crypto.hpp"

#include <compare>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace abgp::records {

using Digest = std::array<std::uint8_t, 32>;

std::string digest_to_hex(const Digest& digest);
std::optional<Digest> digest_from_hex(std::string_view hex) noexcept;

struct DigestHash {
    std::size_t operator()(const Digest& d) const noexcept {
        std::size_t h;
        static_assert(sizeof(h) <= 32);
        std::memcpy(&h, d.data(), sizeof(h));
        return h;
    }
};

enum class SignatureType { Intermediate, Multisig };

const char* signature_type_name(SignatureType type) noexcept;

/// The replicated unit. Intermediate records carry one partial signature per
/// signer; a multisig record carries exactly one entry mapping the shared
/// public key to the aggregated signature. (timestamp, timestampIndex) is the
/// replication watermark and is reassigned by the local store on every
/// mutation; createdAt never changes after the original append.
struct RecordModel {
    Digest hash{};
    std::string key;
    std::string value;
    std::uint64_t version = 0;
    SignatureType signature_type = SignatureType::Intermediate;
    std::map<crypto::CurvePoint, crypto::Scalar> signatures;
    std::vector<crypto::CurvePoint> public_keys;  // strictly ascending
    std::int64_t timestamp = 0;
    std::uint64_t timestamp_index = 0;
    std::int64_t created_at = 0;
    std::optional<crypto::Scalar> state_hash;  // node-local, never replicated

    bool operator==(const RecordModel& other) const = default;
};

/// Sorted cluster membership with the fault bound f = floor((N-1)/2) and
/// quorum Q = f+1. At most 64 members so signer subsets fit one bitmap word.
class ClusterSpec {
public:
    /// Sorts members; throws Error{ConfigError} on duplicates or size < 3.
    static ClusterSpec from_members(std::vector<crypto::CurvePoint> members);

    const std::vector<crypto::CurvePoint>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    std::size_t fault_bound() const noexcept { return (members_.size() - 1) / 2; }
    std::size_t quorum() const noexcept { return fault_bound() + 1; }

    bool contains(const crypto::CurvePoint& key) const noexcept;
    std::optional<std::size_t> index_of(const crypto::CurvePoint& key) const noexcept;

private:
    explicit ClusterSpec(std::vector<crypto::CurvePoint> members) : members_(std::move(members)) {}
    std::vector<crypto::CurvePoint> members_;
};

/// sha256 over utf8(key) | 0x1F | utf8(value) | 0x1F | utf8(decimal(version)).
/// The unit separator keeps the framing injective.
Digest compute_record_hash(std::string_view key, std::string_view value, std::uint64_t version);

enum class ValidationReason {
    Ok,
    BadHash,
    UnknownSigner,
    BadPartialSignature,
    SharedKeyMismatch,
    BadMultisig,
    BadSignatureCount,
};

const char* validation_reason_name(ValidationReason reason) noexcept;

struct ValidationVerdict {
    ValidationReason reason = ValidationReason::Ok;
    bool ok() const noexcept { return reason == ValidationReason::Ok; }
};

/// Full untrusted-record check: hash recomputation, cluster membership,
/// signature-count bounds and per-type signature verification. A failing
/// record must be discarded, never stored.
ValidationVerdict validate_record(const RecordModel& record, const ClusterSpec& cluster);

/// Ascending total order by (timestamp, timestampIndex, hash). The hash
/// component only matters for records from different origin nodes; one store
/// never holds two records with the same stamp.
std::strong_ordering replication_order(const RecordModel& a, const RecordModel& b) noexcept;

struct OrderKey {
    std::int64_t timestamp = 0;
    std::uint64_t timestamp_index = 0;
    Digest hash{};
    auto operator<=>(const OrderKey& other) const = default;
};

OrderKey order_key(const RecordModel& record) noexcept;

/// Signer subset -> integer, first (lowest) member = most significant bit.
/// Throws Error{UnknownSigner} if `present` contains a non-member.
std::uint64_t bitmap_encode(const ClusterSpec& cluster, std::span<const crypto::CurvePoint> present);

/// Inverse of bitmap_encode. Throws Error{BadBitmap} when bitmap >= 2^N.
std::vector<crypto::CurvePoint> bitmap_decode(const ClusterSpec& cluster, std::uint64_t bitmap);

/// Record wire/journal schema. Public keys always travel as a bitmap;
/// stateHash is written only when `include_state_hash` is set (journal).
std::string record_to_json(const RecordModel& record, const ClusterSpec& cluster,
                           bool include_state_hash = false);

struct RecordParse {
    std::optional<RecordModel> record;
    std::string error;  // set when record is empty
};

/// Parses and structurally validates one record object. `accept_state_hash`
/// is only set on the journal path; the wire path drops the field.
RecordParse record_from_json(std::string_view json_text, const ClusterSpec& cluster,
                             bool accept_state_hash = false);

}  // namespace abgp::records
