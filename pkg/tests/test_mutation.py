from chanshort import acceptance, design


def test_gradient_check_catches_a_one_percent_error(monkeypatch):
    original = design._fom_grad
    monkeypatch.setattr(design, "_fom_grad", lambda *a: 1.01 * original(*a))
    assert not acceptance.check_gradient(draws=2).passed


def test_gradient_check_passes_unmodified():
    assert acceptance.check_gradient(draws=2).passed
