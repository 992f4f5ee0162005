//! The voice packet stream and the delay-based covert mechanics: selected
//! packets are intentionally over-delayed so standard receivers discard them
//! as late, while a receiver aware of the scheme reads covert data out of
//! their payloads. A simple network (fixed delay, truncated-Gaussian jitter,
//! independent random loss) and both receiver types are modeled.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scheduler::CodecProfile;

/// A bitstream with explicit bit length; MSB-first within each byte. Unused
/// trailing bits of the last byte are kept zero so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitStream {
    bytes: Vec<u8>,
    bit_len: u64,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// All bits of the given bytes.
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_len = bytes.len() as u64 * 8;
        Self { bytes, bit_len }
    }

    pub fn len_bits(&self) -> u64 {
        self.bit_len
    }

    pub fn is_empty(&self) -> bool {
        self.bit_len == 0
    }

    pub fn bit(&self, i: u64) -> bool {
        debug_assert!(i < self.bit_len);
        self.bytes[(i / 8) as usize] >> (7 - (i % 8)) & 1 == 1
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.bit_len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let idx = (self.bit_len / 8) as usize;
            self.bytes[idx] |= 1 << (7 - (self.bit_len % 8));
        }
        self.bit_len += 1;
    }

    /// Append the first `n_bits` of `source` (MSB-first per byte).
    pub fn append_bits(&mut self, source: &[u8], n_bits: u64) {
        debug_assert!(n_bits <= source.len() as u64 * 8);
        for i in 0..n_bits {
            self.push_bit(source[(i / 8) as usize] >> (7 - (i % 8)) & 1 == 1);
        }
    }

    pub fn append(&mut self, other: &BitStream) {
        self.append_bits(&other.bytes, other.bit_len);
    }

    /// Keep only the first `n_bits`, zeroing any freed trailing bits.
    pub fn truncate_bits(&mut self, n_bits: u64) {
        if n_bits >= self.bit_len {
            return;
        }
        self.bit_len = n_bits;
        self.bytes.truncate(n_bits.div_ceil(8) as usize);
        let rem = (n_bits % 8) as u32;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xFFu8 << (8 - rem);
            }
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }
}

/// Covert payload carried by one packet: `true_bits` of data at the front,
/// zero-padded out to the codec payload capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovertChunk {
    pub data: BitStream,
    pub true_bits: u64,
}

impl CovertChunk {
    /// Pad `raw` out to `capacity_bits`. Errors if it does not fit.
    pub fn pad_to_capacity(raw: BitStream, capacity_bits: u64) -> Result<Self> {
        let true_bits = raw.len_bits();
        if true_bits > capacity_bits {
            return Err(Error::Framing {
                capacity: capacity_bits,
                got: true_bits,
            });
        }
        let mut data = raw;
        while data.len_bits() < capacity_bits {
            data.push_bit(false);
        }
        Ok(Self { data, true_bits })
    }
}

/// Where covert content bits come from.
#[derive(Debug, Clone)]
pub enum CovertSource {
    /// Deterministic pseudorandom bits from the given generator.
    Random(Box<rand_chacha::ChaCha8Rng>),
    /// A byte buffer read as a bitstream; zero bits past the end.
    Bytes(std::sync::Arc<Vec<u8>>),
}

/// Sequential reader over a covert source.
#[derive(Debug, Clone)]
pub struct CovertCursor {
    source: CovertSource,
    position_bits: u64,
}

impl CovertCursor {
    pub fn new(source: CovertSource) -> Self {
        Self {
            source,
            position_bits: 0,
        }
    }

    /// Produce the next `n_bits` of covert data.
    pub fn take(&mut self, n_bits: u64) -> BitStream {
        let mut out = BitStream::new();
        match &mut self.source {
            CovertSource::Random(rng) => {
                let n_bytes = n_bits.div_ceil(8) as usize;
                let mut buf = vec![0u8; n_bytes];
                rng.fill(&mut buf[..]);
                out.append_bits(&buf, n_bits);
            }
            CovertSource::Bytes(data) => {
                for i in self.position_bits..self.position_bits + n_bits {
                    let byte = (i / 8) as usize;
                    let bit = byte < data.len() && data[byte] >> (7 - (i % 8)) & 1 == 1;
                    out.push_bit(bit);
                }
            }
        }
        self.position_bits += n_bits;
        out
    }
}

/// What a packet carries.
#[derive(Debug, Clone, PartialEq)]
pub enum PacketPayload {
    /// Ordinary speech frame; content is a synthetic seq-derived marker.
    Voice,
    /// Covert bits replacing the speech frame.
    Covert(CovertChunk),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Voice,
    Covert,
}

/// One RTP-like audio packet and its life through the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioPacket {
    pub seq: u64,
    /// Frame generation time at the sender, seconds into the call.
    pub gen_time: f64,
    /// Actual transmission time; exceeds gen_time only for covert packets.
    pub send_time: f64,
    /// Arrival time at the receiver; `None` before transmission or when lost.
    pub arrival_time: Option<f64>,
    pub payload: PacketPayload,
}

impl AudioPacket {
    pub fn kind(&self) -> PacketKind {
        match self.payload {
            PacketPayload::Voice => PacketKind::Voice,
            PacketPayload::Covert(_) => PacketKind::Covert,
        }
    }

    /// Synthetic marker bytes for voice frames, derived from seq.
    pub fn voice_fill(seq: u64, n_bytes: usize) -> Vec<u8> {
        let mut state = seq
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
        (0..n_bytes)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 56) as u8
            })
            .collect()
    }

    /// The payload as wire bytes, `payload_bits` long.
    pub fn payload_bits(&self, codec: &CodecProfile) -> BitStream {
        match &self.payload {
            PacketPayload::Voice => {
                let bytes = Self::voice_fill(self.seq, codec.payload_bits.div_ceil(8) as usize);
                let mut bs = BitStream::new();
                bs.append_bits(&bytes, codec.payload_bits);
                bs
            }
            PacketPayload::Covert(chunk) => chunk.data.clone(),
        }
    }
}

/// Generate the voice stream for a call: ceil(duration / frame) packets at
/// gen_time = seq * frame_interval.
pub fn generate_stream(codec: &CodecProfile, duration: f64) -> Result<Vec<AudioPacket>> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "stream duration must be positive, got {duration}"
        )));
    }
    // count in integer milliseconds so e.g. 3.0 s / 30 ms is exactly 100
    let n = (duration * 1000.0 / codec.frame_ms as f64).ceil() as u64;
    Ok((0..n)
        .map(|seq| {
            let gen_time = seq as f64 * codec.frame_interval();
            AudioPacket {
                seq,
                gen_time,
                send_time: gen_time,
                arrival_time: None,
                payload: PacketPayload::Voice,
            }
        })
        .collect())
}

/// Turn a voice packet into a covert carrier: replace the payload and delay
/// transmission by `lack_delay`. Seq and gen_time stay untouched.
pub fn embed(
    packet: AudioPacket,
    covert_bits: BitStream,
    lack_delay: f64,
    codec: &CodecProfile,
) -> Result<AudioPacket> {
    if packet.kind() == PacketKind::Covert {
        return Err(Error::InvalidPacket(format!(
            "packet {} already carries covert data",
            packet.seq
        )));
    }
    let chunk = CovertChunk::pad_to_capacity(covert_bits, codec.payload_bits)?;
    Ok(AudioPacket {
        send_time: packet.gen_time + lack_delay,
        payload: PacketPayload::Covert(chunk),
        ..packet
    })
}

/// Network path: fixed base delay, nonnegative Gaussian jitter, independent
/// random loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkModel {
    pub base_delay: f64,
    /// Standard deviation of the jitter term; draws are truncated at zero.
    pub jitter_std: f64,
    pub loss_prob: f64,
}

impl NetworkModel {
    pub fn validate(&self) -> Result<()> {
        if self.base_delay < 0.0 || self.jitter_std < 0.0 {
            return Err(Error::InvalidParameter(
                "network delays must be nonnegative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return Err(Error::InvalidParameter(format!(
                "loss probability must be in [0, 1], got {}",
                self.loss_prob
            )));
        }
        Ok(())
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        // Box-Muller; u1 in (0, 1]
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Deliver or drop each packet, filling arrival times. Deterministic for
    /// a fixed RNG state.
    pub fn transmit<R: Rng + ?Sized>(&self, packets: &mut [AudioPacket], rng: &mut R) {
        for p in packets.iter_mut() {
            let lost = rng.random::<f64>() < self.loss_prob;
            if lost {
                p.arrival_time = None;
                continue;
            }
            let jitter = if self.jitter_std > 0.0 {
                (self.jitter_std * Self::standard_normal(rng)).max(0.0)
            } else {
                0.0
            };
            p.arrival_time = Some(p.send_time + self.base_delay + jitter);
        }
    }
}

/// Receiver playout policy. A packet is usable only if its mouth-to-ear lag
/// (arrival minus generation) is within the playout deadline; the intentional
/// covert delay must exceed what the deadline leaves over the base network
/// delay so unaware receivers always discard carriers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterBufferConfig {
    pub playout_deadline: f64,
    pub lack_delay: f64,
}

impl JitterBufferConfig {
    /// Smallest comfortable covert delay for the given path.
    pub fn default_lack_delay(playout_deadline: f64, base_delay: f64) -> f64 {
        playout_deadline - base_delay + 0.1
    }

    pub fn validate(&self, base_delay: f64) -> Result<()> {
        if !(self.playout_deadline > 0.0) {
            return Err(Error::InvalidParameter(
                "playout deadline must be positive".into(),
            ));
        }
        if base_delay > self.playout_deadline {
            return Err(Error::InvalidParameter(format!(
                "base delay {} exceeds playout deadline {}; no packet would ever play",
                base_delay, self.playout_deadline
            )));
        }
        if self.lack_delay <= self.playout_deadline - base_delay {
            return Err(Error::InvalidParameter(format!(
                "lack_delay {} must exceed playout_deadline - base_delay = {} so \
                 covert packets always arrive late at unaware receivers",
                self.lack_delay,
                self.playout_deadline - base_delay
            )));
        }
        Ok(())
    }

    fn plays(&self, p: &AudioPacket) -> Option<bool> {
        p.arrival_time
            .map(|arrival| arrival - p.gen_time <= self.playout_deadline)
    }
}

/// What a standard (unaware) receiver observes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnawareOutcome {
    /// Seqs played out, in seq order.
    pub played: Vec<u64>,
    /// Packets lost in the network.
    pub lost: u64,
    /// Packets that arrived past the playout deadline.
    pub late: u64,
}

impl UnawareOutcome {
    pub fn discarded(&self) -> u64 {
        self.lost + self.late
    }
}

/// Standard receiver: plays in-time arrivals, discards the lost and the late.
/// Payload contents are never consulted.
pub fn receive_unaware(packets: &[AudioPacket], buffer: &JitterBufferConfig) -> UnawareOutcome {
    let mut out = UnawareOutcome {
        played: Vec::new(),
        lost: 0,
        late: 0,
    };
    for p in packets {
        match buffer.plays(p) {
            Some(true) => out.played.push(p.seq),
            Some(false) => out.late += 1,
            None => out.lost += 1,
        }
    }
    out.played.sort_unstable();
    out
}

/// What the covert-aware receiver extracts in addition to normal playout.
#[derive(Debug, Clone, PartialEq)]
pub struct AwareOutcome {
    pub played: Vec<u64>,
    /// Concatenated payloads of all late arrivals, in seq order (covert
    /// chunks are padded to the payload size, so this is chunk-aligned).
    pub extracted: BitStream,
    /// True covert bits among the extracted payloads (pad excluded).
    pub covert_bits_delivered: u64,
    /// Late arrivals that were actually voice, misread as covert carriers.
    pub false_covert_reads: u64,
}

/// Covert-aware receiver: identical playout, but late arrivals are read as
/// covert carriers. Identification is purely timing-based, so a naturally
/// very-late voice packet is misread; those are counted, not hidden.
pub fn receive_aware(
    packets: &[AudioPacket],
    buffer: &JitterBufferConfig,
    codec: &CodecProfile,
) -> AwareOutcome {
    let mut out = AwareOutcome {
        played: Vec::new(),
        extracted: BitStream::new(),
        covert_bits_delivered: 0,
        false_covert_reads: 0,
    };
    let mut carriers: Vec<&AudioPacket> = Vec::new();
    for p in packets {
        match buffer.plays(p) {
            Some(true) => out.played.push(p.seq),
            Some(false) => carriers.push(p),
            None => {}
        }
    }
    carriers.sort_unstable_by_key(|p| p.seq);
    for p in carriers {
        out.extracted.append(&p.payload_bits(codec));
        match &p.payload {
            PacketPayload::Covert(chunk) => out.covert_bits_delivered += chunk.true_bits,
            PacketPayload::Voice => out.false_covert_reads += 1,
        }
    }
    out.played.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn buffer() -> JitterBufferConfig {
        JitterBufferConfig {
            playout_deadline: 0.10,
            lack_delay: 0.16,
        }
    }

    fn network_clean() -> NetworkModel {
        NetworkModel {
            base_delay: 0.05,
            jitter_std: 0.0,
            loss_prob: 0.0,
        }
    }

    #[test]
    fn stream_counts() {
        let g711 = CodecProfile::g711();
        assert_eq!(generate_stream(&g711, 1.0).unwrap().len(), 50);
        assert_eq!(generate_stream(&g711, 0.02).unwrap().len(), 1);
        let g7231 = CodecProfile::g7231();
        assert_eq!(generate_stream(&g7231, 3.0).unwrap().len(), 100);
        assert_eq!(generate_stream(&g7231, 0.03).unwrap().len(), 1);
        assert!(generate_stream(&g711, 0.0).is_err());
    }

    #[test]
    fn stream_seq_and_times_are_regular() {
        let codec = CodecProfile::g729a();
        let packets = generate_stream(&codec, 2.0).unwrap();
        for (i, p) in packets.iter().enumerate() {
            assert_eq!(p.seq, i as u64);
            assert_eq!(p.gen_time, i as f64 * 0.02);
            assert_eq!(p.send_time, p.gen_time);
            assert_eq!(p.kind(), PacketKind::Voice);
        }
    }

    #[test]
    fn embed_sets_delay_and_payload() {
        let codec = CodecProfile::g711();
        let packets = generate_stream(&codec, 0.1).unwrap();
        let mut bits = BitStream::new();
        bits.append_bits(&[0xAB, 0xCD], 16);
        let covert = embed(packets[2].clone(), bits, 0.5, &codec).unwrap();
        assert_eq!(covert.kind(), PacketKind::Covert);
        assert_eq!(covert.seq, 2);
        assert!((covert.send_time - (covert.gen_time + 0.5)).abs() < 1e-12);
        match &covert.payload {
            PacketPayload::Covert(chunk) => {
                assert_eq!(chunk.true_bits, 16);
                assert_eq!(chunk.data.len_bits(), 1280);
                // padding is zeros
                assert!(!chunk.data.bit(16) && !chunk.data.bit(1279));
            }
            _ => panic!("expected covert payload"),
        }
    }

    #[test]
    fn embed_rejects_oversize_and_double_embed() {
        let codec = CodecProfile::g729a(); // 160-bit payload
        let packets = generate_stream(&codec, 0.1).unwrap();
        let big = BitStream::from_bytes(vec![0u8; 21]); // 168 bits
        assert!(matches!(
            embed(packets[0].clone(), big, 0.5, &codec),
            Err(Error::Framing {
                capacity: 160,
                got: 168
            })
        ));
        let once = embed(
            packets[1].clone(),
            BitStream::from_bytes(vec![1]),
            0.5,
            &codec,
        )
        .unwrap();
        assert!(embed(once, BitStream::new(), 0.5, &codec).is_err());
    }

    #[test]
    fn clean_network_arrivals_are_base_delayed() {
        let mut packets = generate_stream(&CodecProfile::g711(), 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        network_clean().transmit(&mut packets, &mut rng);
        for p in &packets {
            assert_eq!(p.arrival_time, Some(p.send_time + 0.05));
        }
    }

    #[test]
    fn full_loss_drops_everything() {
        let mut packets = generate_stream(&CodecProfile::g711(), 0.5).unwrap();
        let network = NetworkModel {
            loss_prob: 1.0,
            ..network_clean()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        network.transmit(&mut packets, &mut rng);
        assert!(packets.iter().all(|p| p.arrival_time.is_none()));
    }

    #[test]
    fn measured_loss_concentrates() {
        let codec = CodecProfile::g711();
        let mut packets = generate_stream(&codec, 2000.0).unwrap(); // 1e5 packets
        let network = NetworkModel {
            loss_prob: 0.03,
            ..network_clean()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        network.transmit(&mut packets, &mut rng);
        let lost = packets.iter().filter(|p| p.arrival_time.is_none()).count();
        let frac = lost as f64 / packets.len() as f64;
        assert!((frac - 0.03).abs() < 0.003, "measured loss {frac}");
    }

    #[test]
    fn transmit_preserves_count_and_order() {
        let codec = CodecProfile::g729a();
        let mut packets = generate_stream(&codec, 10.0).unwrap();
        let n = packets.len();
        let network = NetworkModel {
            loss_prob: 0.2,
            jitter_std: 0.01,
            ..network_clean()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        network.transmit(&mut packets, &mut rng);
        assert_eq!(packets.len(), n);
        for (i, p) in packets.iter().enumerate() {
            assert_eq!(p.seq, i as u64);
        }
    }

    #[test]
    fn buffer_invariant_validation() {
        let buf = buffer();
        assert!(buf.validate(0.05).is_ok());
        // lack_delay too small for a faster path: margin is 0.1 - 0.0 = 0.1 < 0.16 ok;
        // but with base 0, deadline 0.2 the margin 0.2 >= 0.16 fails
        let bad = JitterBufferConfig {
            playout_deadline: 0.2,
            lack_delay: 0.16,
        };
        assert!(bad.validate(0.0).is_err());
        // base delay beyond deadline
        assert!(buf.validate(0.2).is_err());
    }

    #[test]
    fn unaware_receiver_plays_voice_discards_covert() {
        let codec = CodecProfile::g711();
        let mut packets = generate_stream(&codec, 1.0).unwrap();
        // embed packets 10 and 20
        for &i in &[10usize, 20] {
            let p = packets[i].clone();
            packets[i] = embed(p, BitStream::from_bytes(vec![0xFF]), 0.16, &codec).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        network_clean().transmit(&mut packets, &mut rng);
        let out = receive_unaware(&packets, &buffer());
        assert_eq!(out.played.len(), 48);
        assert_eq!(out.late, 2);
        assert_eq!(out.lost, 0);
        assert!(!out.played.contains(&10) && !out.played.contains(&20));
    }

    #[test]
    fn unaware_output_ignores_payload_contents() {
        let codec = CodecProfile::g711();
        let mut a = generate_stream(&codec, 1.0).unwrap();
        let p = a[7].clone();
        a[7] = embed(p, BitStream::from_bytes(vec![0x00, 0x11]), 0.16, &codec).unwrap();
        let mut b = a.clone();
        if let PacketPayload::Covert(chunk) = &mut b[7].payload {
            chunk.data = {
                let mut alt = BitStream::new();
                alt.append_bits(&[0xFF; 160], 1280);
                alt
            };
        }
        let mut rng_a = ChaCha8Rng::seed_from_u64(17);
        let mut rng_b = ChaCha8Rng::seed_from_u64(17);
        let net = NetworkModel {
            loss_prob: 0.1,
            jitter_std: 0.02,
            ..network_clean()
        };
        net.transmit(&mut a, &mut rng_a);
        net.transmit(&mut b, &mut rng_b);
        assert_eq!(
            receive_unaware(&a, &buffer()),
            receive_unaware(&b, &buffer())
        );
    }

    #[test]
    fn aware_receiver_roundtrip_in_seq_order() {
        let codec = CodecProfile::g729a();
        let mut packets = generate_stream(&codec, 1.0).unwrap();
        let mut cursor =
            CovertCursor::new(CovertSource::Random(Box::new(ChaCha8Rng::seed_from_u64(8))));
        let mut embedded = BitStream::new();
        for &i in &[5usize, 25, 40] {
            let chunk = cursor.take(codec.payload_bits);
            let padded = CovertChunk::pad_to_capacity(chunk.clone(), codec.payload_bits).unwrap();
            embedded.append(&padded.data);
            let p = packets[i].clone();
            packets[i] = embed(p, chunk, 0.16, &codec).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        network_clean().transmit(&mut packets, &mut rng);
        let out = receive_aware(&packets, &buffer(), &codec);
        assert_eq!(out.extracted, embedded);
        assert_eq!(out.covert_bits_delivered, 3 * 160);
        assert_eq!(out.false_covert_reads, 0);
        // voice playout identical to the unaware receiver
        assert_eq!(out.played, receive_unaware(&packets, &buffer()).played);
    }

    #[test]
    fn lost_middle_carrier_drops_its_chunk() {
        let codec = CodecProfile::g729a();
        let mut packets = generate_stream(&codec, 1.0).unwrap();
        let chunks: Vec<BitStream> = (0..3)
            .map(|v| BitStream::from_bytes(vec![v as u8 + 1; 20]))
            .collect();
        for (j, &i) in [5usize, 25, 40].iter().enumerate() {
            let p = packets[i].clone();
            packets[i] = embed(p, chunks[j].clone(), 0.16, &codec).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        network_clean().transmit(&mut packets, &mut rng);
        packets[25].arrival_time = None; // middle carrier lost
        let out = receive_aware(&packets, &buffer(), &codec);
        let mut expected = BitStream::new();
        expected.append(&chunks[0]);
        expected.append(&chunks[2]);
        assert_eq!(out.extracted, expected);
        assert_eq!(out.covert_bits_delivered, 2 * 160);
    }

    #[test]
    fn no_carriers_no_bits() {
        let codec = CodecProfile::g711();
        let mut packets = generate_stream(&codec, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        network_clean().transmit(&mut packets, &mut rng);
        let out = receive_aware(&packets, &buffer(), &codec);
        assert!(out.extracted.is_empty());
        assert_eq!(out.covert_bits_delivered, 0);
    }

    #[test]
    fn naturally_late_voice_counts_as_false_read() {
        let codec = CodecProfile::g711();
        let mut packets = generate_stream(&codec, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        network_clean().transmit(&mut packets, &mut rng);
        // jitter pushed one voice packet past the deadline
        packets[3].arrival_time = Some(packets[3].send_time + 0.2);
        let unaware = receive_unaware(&packets, &buffer());
        assert_eq!(unaware.late, 1);
        let aware = receive_aware(&packets, &buffer(), &codec);
        assert_eq!(aware.false_covert_reads, 1);
        assert_eq!(aware.extracted.len_bits(), 1280);
        assert_eq!(aware.covert_bits_delivered, 0);
    }

    #[test]
    fn bitstream_truncate_and_bits() {
        let mut bs = BitStream::from_bytes(vec![0b1010_1010, 0b1100_0011]);
        assert_eq!(bs.len_bits(), 16);
        assert!(bs.bit(0));
        assert!(!bs.bit(1));
        bs.truncate_bits(10);
        assert_eq!(bs.len_bits(), 10);
        assert_eq!(bs.as_bytes(), &[0b1010_1010, 0b1100_0000]);
    }

    #[test]
    fn covert_cursor_byte_source_zero_fills() {
        let mut cursor = CovertCursor::new(CovertSource::Bytes(std::sync::Arc::new(vec![0xF0])));
        let got = cursor.take(12);
        assert_eq!(got.len_bits(), 12);
        assert_eq!(got.as_bytes(), &[0xF0, 0x00]);
    }
}
