"""Multiparty secret sharing: an honest run and an intercepted one.

Run:  python demos/06_secret_sharing.py
"""

from walknet import MqssConfig, intercept_resend_error_rate, run_mqss

print("== honest run: d=5, three participants, secret 1234 ==")
t = run_mqss(MqssConfig(d=5, participants=3, secret=1234, detect_pairs=25, seed=4))
for event in t.events:
    print(" ", event)
print(f"coin results (dealer only): {t.coin_results}, position value {t.position_result}")
print(f"dealer measured {t.dealer_result}; participants measured {t.participant_results}")
print(f"published value p = {t.public_value}")
print(f"shares: {[str(s) for s in t.shares]}")
print(f"reconstructed secret: {t.reconstructed}")

print("\n== channel under intercept-resend attack ==")
print(f"exact per-pair error rate at d=2: {intercept_resend_error_rate(2):.4f}")
t = run_mqss(MqssConfig(d=2, participants=2, secret=7, detect_pairs=400,
                        threshold=0.05, eavesdrop_channel=1, seed=12))
print(f"observed error rate: {t.channel_checks[0]['error_rate']:.4f}")
print(f"aborted: {t.aborted}")
