"""Reference values frozen from ``tests/oracles/make_oracles.py``.

The generator does not import the package.  Jost data refer to the
(1, 0.5, 0.05) black hole with m_f = 0.2, q_f = 1, w = 1, xi = 1 and the
potential restricted to [-160, 340].
"""

DS_ROOTS = (0.13397149639197847, 2.011311425613838, 6.465115452682517)
DS_NEGATIVE_ROOT = -8.610398374688334
JOST_A_R = [[(0.9519569121883772-0.30620629944342603j), (0.0012148270284722798+0.0037767446293053616j), (-7.569296636373049e-08+1.6016610817463351e-06j), (6.400428546949166e-06+6.560888917666519e-06j)], [(0.0012148270284722635+0.0037767446293053676j), (0.9519569121883774-0.30620629944342603j), (-6.400428546907111e-06-6.5608889174234695e-06j), (7.569296651754274e-08-1.601661081834796e-06j)], [(-7.56929663848086e-08-1.6016610817313793e-06j), (-6.400428547077909e-06+6.560888917511473e-06j), (0.9519569121883772+0.30620629944342603j), (-0.0012148270284722752+0.0037767446293053603j)], [(6.4004285469140025e-06-6.560888917424991e-06j), (7.569296653408348e-08+1.6016610817588416e-06j), (-0.0012148270284722622+0.0037767446293053655j), (0.9519569121883774+0.306206299443426j)]]
JOST_Y_R_AT_0 = [[(0.9803365739626827-0.21581217314101245j), (0.0005576427528013074+0.003111271043963039j), (-0.05682569325580133+0.0014054222469619257j), (-0.000552694078216241+0.06643224519084198j)], [(0.0005576427528012889+0.0031112710439630403j), (0.9803365739626828-0.21581217314101248j), (0.0005526940782163529-0.06643224519084173j), (0.05682569325580135-0.0014054222469620228j)], [(-0.05682569325580133-0.0014054222469619257j), (0.0005526940782161855+0.06643224519084188j), (0.9803365739626827+0.21581217314101245j), (-0.0005576427528013015+0.0031112710439630247j)], [(-0.0005526940782163529-0.06643224519084173j), (0.05682569325580139+0.0014054222469620055j), (-0.0005576427528012889+0.00311127104396304j), (0.9803365739626828+0.2158121731410124j)]]
BETA = -0.6747212902536359
RN_TORTOISE = [-30.167400249689223, -17.06903466385738, 20.512130525679154, 105.20531534469409]
