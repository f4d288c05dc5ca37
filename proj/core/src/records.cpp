#include "abgp/records.hpp"

#include "abgp/errors.hpp"

#include <algorithm>

namespace abgp::records {

namespace {

int hex_nibble(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::string digest_to_hex(const Digest& digest) {
    static const char* digits = "0123456789abcdef";
    std::string out(64, '0');
    for (std::size_t i = 0; i < 32; ++i) {
        out[2 * i] = digits[digest[i] >> 4];
        out[2 * i + 1] = digits[digest[i] & 0x0F];
    }
    return out;
}

std::optional<Digest> digest_from_hex(std::string_view hex) noexcept {
    if (hex.size() != 64) return std::nullopt;
    Digest out{};
    for (std::size_t i = 0; i < 32; ++i) {
        int hi = hex_nibble(hex[2 * i]);
        int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

const char* signature_type_name(SignatureType type) noexcept {
    return type == SignatureType::Intermediate ? "INTERMEDIATE" : "MULTISIG";
}

const char* validation_reason_name(ValidationReason reason) noexcept {
    switch (reason) {
        case ValidationReason::Ok: return "Ok";
        case ValidationReason::BadHash: return "BadHash";
        case ValidationReason::UnknownSigner: return "UnknownSigner";
        case ValidationReason::BadPartialSignature: return "BadPartialSignature";
        case ValidationReason::SharedKeyMismatch: return "SharedKeyMismatch";
        case ValidationReason::BadMultisig: return "BadMultisig";
        case ValidationReason::BadSignatureCount: return "BadSignatureCount";
    }
    return "?";
}

ClusterSpec ClusterSpec::from_members(std::vector<crypto::CurvePoint> members) {
    if (members.size() < 3) {
        throw Error(Errc::ConfigError, "cluster needs at least 3 members");
    }
    if (members.size() > 64) {
        throw Error(Errc::ConfigError, "clusters larger than 64 members are not supported");
    }
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
        throw Error(Errc::ConfigError, "duplicate member public key");
    }
    return ClusterSpec(std::move(members));
}

bool ClusterSpec::contains(const crypto::CurvePoint& key) const noexcept {
    return std::binary_search(members_.begin(), members_.end(), key);
}

std::optional<std::size_t> ClusterSpec::index_of(const crypto::CurvePoint& key) const noexcept {
    auto it = std::lower_bound(members_.begin(), members_.end(), key);
    if (it == members_.end() || !(*it == key)) return std::nullopt;
    return static_cast<std::size_t>(it - members_.begin());
}

Digest compute_record_hash(std::string_view key, std::string_view value, std::uint64_t version) {
    std::vector<std::uint8_t> preimage;
    preimage.reserve(key.size() + value.size() + 22);
    preimage.insert(preimage.end(), key.begin(), key.end());
    preimage.push_back(0x1F);
    preimage.insert(preimage.end(), value.begin(), value.end());
    preimage.push_back(0x1F);
    const std::string ver = std::to_string(version);
    preimage.insert(preimage.end(), ver.begin(), ver.end());
    return crypto::sha256(preimage);
}

ValidationVerdict validate_record(const RecordModel& record, const ClusterSpec& cluster) {
    if (compute_record_hash(record.key, record.value, record.version) != record.hash) {
        return {ValidationReason::BadHash};
    }

    // structural bounds on the signer set
    if (!std::is_sorted(record.public_keys.begin(), record.public_keys.end()) ||
        std::adjacent_find(record.public_keys.begin(), record.public_keys.end()) !=
            record.public_keys.end()) {
        return {ValidationReason::BadSignatureCount};
    }
    for (const auto& pk : record.public_keys) {
        if (!cluster.contains(pk)) return {ValidationReason::UnknownSigner};
    }

    const crypto::Scalar hash_scalar = crypto::hash_to_scalar(record.hash);

    if (record.signature_type == SignatureType::Intermediate) {
        const std::size_t n = record.signatures.size();
        if (n < 1 || n >= cluster.quorum()) return {ValidationReason::BadSignatureCount};
        if (n != record.public_keys.size()) return {ValidationReason::BadSignatureCount};
        for (const auto& [signer, sig] : record.signatures) {
            if (!std::binary_search(record.public_keys.begin(), record.public_keys.end(), signer)) {
                return {ValidationReason::BadSignatureCount};
            }
            if (!cluster.contains(signer)) return {ValidationReason::UnknownSigner};
            if (!crypto::verify_partial(sig, signer, hash_scalar)) {
                return {ValidationReason::BadPartialSignature};
            }
        }
        return {};
    }

    // MULTISIG
    if (record.signatures.size() != 1) return {ValidationReason::BadSignatureCount};
    if (record.public_keys.size() < cluster.quorum()) return {ValidationReason::BadSignatureCount};
    const auto& [claimed_shared, multisig] = *record.signatures.begin();
    const crypto::CurvePoint rebuilt =
        crypto::build_shared_public_key(record.public_keys, hash_scalar);
    if (!(rebuilt == claimed_shared)) return {ValidationReason::SharedKeyMismatch};
    if (!crypto::verify_multisig(multisig, claimed_shared)) return {ValidationReason::BadMultisig};
    return {};
}

std::strong_ordering replication_order(const RecordModel& a, const RecordModel& b) noexcept {
    return order_key(a) <=> order_key(b);
}

OrderKey order_key(const RecordModel& record) noexcept {
    return OrderKey{record.timestamp, record.timestamp_index, record.hash};
}

std::uint64_t bitmap_encode(const ClusterSpec& cluster, std::span<const crypto::CurvePoint> present) {
    std::uint64_t bits = 0;
    for (const auto& pk : present) {
        const auto idx = cluster.index_of(pk);
        if (!idx) throw Error(Errc::UnknownSigner, "public key is not a cluster member");
        bits |= std::uint64_t{1} << (cluster.size() - 1 - *idx);
    }
    return bits;
}

std::vector<crypto::CurvePoint> bitmap_decode(const ClusterSpec& cluster, std::uint64_t bitmap) {
    if (cluster.size() < 64 && bitmap >= (std::uint64_t{1} << cluster.size())) {
        throw Error(Errc::BadBitmap, "bitmap out of range for cluster size");
    }
    std::vector<crypto::CurvePoint> present;
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        if (bitmap & (std::uint64_t{1} << (cluster.size() - 1 - i))) {
            present.push_back(cluster.members()[i]);
        }
    }
    return present;
}

}  // namespace abgp::records
