use glovekit::bus::client::{read_request, write_multiple_request, write_single_request, Master};
use glovekit::bus::registers::{ENCODER_BASE, LRA_BASE, SERVO_BASE};
use glovekit::bus::transport::{serve_tcp, DeviceTask, TcpLink};
use glovekit::bus::{crc16_raw, function, BusError, BusFrame, ExceptionCode, GloveDevice};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bit-at-a-time CRC-16/MODBUS.
fn crc_bitwise(bytes: &[u8]) -> u16 {
    let mut crc: u16 = 0xFFFF;
    for &b in bytes {
        crc ^= b as u16;
        for _ in 0..8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ 0xA001
            } else {
                crc >> 1
            };
        }
    }
    crc
}

#[test]
fn table_crc_matches_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let len = rng.random_range(1..300);
        let bytes: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        assert_eq!(crc16_raw(&bytes), crc_bitwise(&bytes));
    }
}

#[test]
fn single_bit_flips_are_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let len = rng.random_range(0..60);
        let payload: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        let frame = BusFrame::new(rng.random(), rng.random(), payload);
        let mut wire = frame.encode().unwrap();
        let bit = rng.random_range(0..wire.len() * 8);
        wire[bit / 8] ^= 1 << (bit % 8);
        assert!(BusFrame::decode(&wire).is_err());
    }
}

fn request() -> impl Strategy<Value = BusFrame> {
    prop_oneof![
        (0u16..0x0400, 1u16..20).prop_map(|(s, n)| read_request(1, function::READ_HOLDING, s, n)),
        (0u16..0x0400, 1u16..20).prop_map(|(s, n)| read_request(1, function::READ_INPUT, s, n)),
        (0u16..0x0400, 0u16..4).prop_map(|(r, v)| write_single_request(1, r, v)),
        (0x0100u16..0x0210, proptest::collection::vec(0u16..3, 1..8))
            .prop_map(|(s, v)| write_multiple_request(1, s, &v).unwrap()),
        any::<u8>().prop_map(|f| BusFrame::new(1, f, vec![0, 0, 0, 1])),
    ]
}

proptest! {
    #[test]
    fn emulator_is_deterministic(reqs in proptest::collection::vec(request(), 1..40)) {
        let mut a = GloveDevice::new(1);
        let mut b = GloveDevice::new(1);
        a.inject_counts(&[7; 16]);
        b.inject_counts(&[7; 16]);
        for r in &reqs {
            prop_assert_eq!(a.handle(r), b.handle(r));
        }
        prop_assert_eq!(a, b);
    }
}

#[test]
fn master_round_trip_through_threaded_device() {
    let mut dev = GloveDevice::new(3);
    dev.inject_counts(&std::array::from_fn(|i| 1000 + i as u16));
    let task = DeviceTask::spawn(dev);
    let mut m = Master::new(task.handle(), 3);
    let counts = m.read_input(ENCODER_BASE, 16).unwrap();
    assert_eq!(counts, (1000..1016).collect::<Vec<u16>>());
    m.write_single(LRA_BASE + 1, 2).unwrap();
    m.write_multiple(SERVO_BASE, &[10, 20, 30, 40, 50]).unwrap();
    assert_eq!(
        m.read_holding(SERVO_BASE, 5).unwrap(),
        vec![10, 20, 30, 40, 50]
    );
    let err = m.write_single(ENCODER_BASE, 1).unwrap_err();
    assert!(
        matches!(
            err,
            BusError::Exception {
                code: Some(ExceptionCode::IllegalDataAddress),
                ..
            }
        ),
        "{err:?}"
    );
    drop(m);
    let dev = task.join();
    assert_eq!(dev.registers.lra[1], 2);
}

#[test]
fn tcp_loopback_uses_same_codec() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let mut dev = GloveDevice::new(1);
    dev.inject_counts(&[42; 16]);
    let task = DeviceTask::spawn(dev);
    let handle = task.handle();
    let server = std::thread::spawn(move || serve_tcp(listener, handle, Some(1)));
    let mut m = Master::new(TcpLink::connect(addr).unwrap(), 1);
    assert_eq!(m.read_input(ENCODER_BASE, 4).unwrap(), vec![42; 4]);
    drop(m);
    server.join().unwrap().unwrap();
}
